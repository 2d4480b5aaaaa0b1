"""Allow running as python -m fourier_mfg."""

from fourier_mfg.cli.main import main

if __name__ == "__main__":
    raise SystemExit(main())
