"""vidtrust: content-integrity ratings for video audio tracks.

Pipeline: ingest metadata + audio, standardize to 16 kHz, chunk into 30 s
windows, transcribe through a pluggable backend, screen for hate speech,
summarize, compare the summary against title + description, and blend the
signals into a 0-100 trustworthiness rating.
"""

__version__ = "0.1.0"
