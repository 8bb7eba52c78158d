"""Counter-UAS DTI evaluation engine and scenario simulator."""

__version__ = "0.1.0"
