"""Berry image morphometrics and blocked-experiment mixed-model inference."""

__version__ = "0.1.0"
