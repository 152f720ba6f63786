"""Exact symbolic checks for deformation quantization and HKR-type theorems."""

__version__ = "0.1.0"
