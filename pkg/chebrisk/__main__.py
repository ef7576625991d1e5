"""Entry point for ``python -m chebrisk``."""

from .cli import run

if __name__ == "__main__":
    run()
