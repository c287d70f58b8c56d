#!/usr/bin/env python3
"""
Launch script for the SmoothCert command-line application.
This script sets up the Python path and runs the CLI.
"""

import sys
from pathlib import Path

# Add the project root to Python path so we can import app modules
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

if __name__ == "__main__":
    from app.main import main
    sys.exit(main())
