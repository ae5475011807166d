"""Decoder laboratory for binary LDPC codes."""
