//! Spectral gaps and exponential clustering envelopes.
