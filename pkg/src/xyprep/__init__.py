"""State preparation for the rotated XY surface code: simulator, decoder, analysis."""

__version__ = "0.1.0"
