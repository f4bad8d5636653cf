# noisygt/__init__.py
"""Non-adaptive group testing under adversarial noise: codeword-graph designs, noisy OR tests, threshold decoding."""

__version__ = "0.3.0"
