import sys

from avecert.cli import main

if __name__ == "__main__":
    try:
        sys.exit(main())
    except BrokenPipeError as exc:
        sys.exit(exc.errno)
