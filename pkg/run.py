#!/usr/bin/env python3
"""
Startup script for the adiabatic inversion toolkit

    python run.py lz-curve --b1 30e-6
    python run.py reproduce-fig2 --power=-4dBm --seed 7
"""

import sys
from pathlib import Path


def setup_environment():
    """Make the project root importable regardless of the working directory"""
    project_root = Path(__file__).parent.absolute()

    if str(project_root) not in sys.path:
        sys.path.insert(0, str(project_root))

    return project_root


def main():
    """Main entry point"""
    setup_environment()

    from src.presentation.cli import main as cli_main

    return cli_main(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
