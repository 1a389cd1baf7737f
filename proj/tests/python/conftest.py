import os
import sys
from pathlib import Path

# build-tree layout: the extension lives in the CMake build directory and
# the package sources under python/
_build = os.environ.get("DCFAIR_BUILD_DIR")
if _build:
    sys.path.insert(0, _build)
_root = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(_root / "python"))
