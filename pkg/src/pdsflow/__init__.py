"""District-level weekly simulator of wheat flow through a Public
Distribution System: ration-card estimation, stock-and-flow dynamics,
nearest-first transport, scenario events, and calibration diagnostics."""

__version__ = "0.1.0"
