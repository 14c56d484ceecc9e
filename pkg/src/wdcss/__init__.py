"""Complementary signal sets and waveform-domain adaptive filtering.

Simulation library for pulse-train radar waveforms whose chip correlations
cancel across the pulse dimension, the interrupted-sampling repeater jamming
models they are designed against, and the waveform-domain adaptive matched
filter that excises jammed segments before integration.
"""

__version__ = "0.1.0"
