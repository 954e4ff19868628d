#!/usr/bin/env python3
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), 'python'))

from bench_cli.main import main

if __name__ == "__main__":
    sys.exit(main())
