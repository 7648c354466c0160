"""
lrpids UI Module.

All console output goes through the 'Rich' library: logging setup, status
spinners, success/error/warning messages and the run summary panel. Machine
readable output (error JSON) is written to stderr separately by the CLI.
"""

import logging
from typing import Dict, List, Optional, Sequence

from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

console = Console()


def setup_logging(verbose: bool = False) -> logging.Logger:
    """
    Configures the logging system to use RichHandler.

    Args:
        verbose (bool): If True, sets the log level to DEBUG. Otherwise, INFO.

    Returns:
        logging.Logger: The configured logger instance for the 'lrpids' namespace.
    """
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, rich_tracebacks=False, show_path=False)],
    )
    logger = logging.getLogger("lrpids")
    logger.setLevel(level)
    return logger


def print_error(title: str, message: str, details: Optional[str] = None):
    """
    Prints a formatted error message.

    Args:
        title (str): The title of the error.
        message (str): The main error message.
        details (str, optional): Additional details or context.
    """
    console.print(f"[bold red]Error:[/bold red] {title}")
    console.print(message)
    if details:
        console.print(f"[dim]{details}[/dim]")


def print_success(message: str):
    console.print(f"\n[bold green]Success![/bold green] {message}")


def print_warning(message: str):
    console.print(f"[yellow]Warning:[/yellow] {message}")


def display_error(error: Dict):
    """Shows a classified error (as produced by ClassifiedError.to_dict) in a red panel."""
    content = f"[red]Problem:[/red] {error.get('message', 'Unknown error')}\n"
    if error.get("field"):
        content += f"[red]Field:[/red] {error['field']}\n"
    content += f"\n[green]Solution:[/green] {error.get('suggestion', 'Check the logs for details')}"
    title = error.get("error_type", "unknown_error").replace("_", " ").title()
    console.print(Panel(content, title=title, border_style="red"))


def display_summary(command: str, config_digest: str, files: Sequence[str], metadata: Dict):
    """
    Displays the outcome of a successful run: written files and headline numbers.

    Args:
        command (str): The command that ran.
        config_digest (str): Digest of the experiment config.
        files (Sequence[str]): Paths of the written outputs.
        metadata (Dict): Command metadata; scalar entries are listed.
    """
    print_success(f"{command} finished (config {config_digest[:12]})")

    table = Table(show_header=False, box=None, pad_edge=False)
    table.add_column(style="bold")
    table.add_column()
    for key in sorted(metadata):
        value = metadata[key]
        if isinstance(value, (bool, int, float)) or (isinstance(value, str) and len(value) <= 40):
            table.add_row(key, f"{value:.6g}" if isinstance(value, float) else str(value))
    console.print(Panel(table, title="Summary", border_style="blue"))

    lines: List[str] = [f"  • {path}" for path in files] or ["  (no files requested)"]
    console.print("[bold]Outputs:[/bold]\n" + "\n".join(lines))
