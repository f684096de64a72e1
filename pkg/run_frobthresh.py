"""
Launcher for the frobthresh command-line tool.
Run this from the project root directory, e.g.

    python run_frobthresh.py fpt --p 7 --ideal "x^2 + y^3"
"""

import sys
from pathlib import Path

# Add the project root to path
sys.path.insert(0, str(Path(__file__).parent))

if __name__ == "__main__":
    from frobthresh.cli import main

    sys.exit(main())
