"""Main entry point for the iupsim package."""
from iupsim.cli import app

if __name__ == "__main__":
    app()
