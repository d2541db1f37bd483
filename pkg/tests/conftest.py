import sys
from pathlib import Path

# make tests/support.py and tests/synthdata.py importable regardless of cwd
sys.path.insert(0, str(Path(__file__).resolve().parent))
