import sys
from colorama import init, Fore, Style

init()

TAG_STYLES = {
    "info":        (Fore.CYAN + Style.BRIGHT, "ℹ️"),
    "info_detail": (Fore.CYAN, " "),
    "config":      (Fore.BLUE + Style.BRIGHT, "⚙️"),
    "progress":    (Fore.MAGENTA + Style.NORMAL, "⏳"),
    "summary":     (Fore.GREEN + Style.BRIGHT, "✅"),
    "warning":     (Fore.YELLOW + Style.BRIGHT, "⚠️"),
    "error":       (Fore.RED + Style.BRIGHT, "❌"),
    "default":     (Fore.WHITE + Style.NORMAL, "•"),
}

_quiet = False


def set_quiet(quiet: bool):
    """Suppress everything except warnings and errors."""
    global _quiet
    _quiet = quiet


def is_quiet() -> bool:
    return _quiet


def output(tag: str, message: str):
    """Central output handler for all script output, with color and emoji."""
    if _quiet and tag not in ("warning", "error"):
        return
    style, emoji = TAG_STYLES.get(tag, TAG_STYLES["default"])

    if tag == "info_detail":
        tag = "info"

    stream = sys.stderr if tag in ("warning", "error") else sys.stdout

    # Standard multi-line messages: prefix only the first line with emoji, indent others
    lines = message.splitlines() or [""]
    print(f"{style}{emoji}[{tag}]{Style.RESET_ALL} {lines[0]}", file=stream)
    for line in lines[1:]:
        print(f"{style}   {line}{Style.RESET_ALL}", file=stream)

    stream.flush()
