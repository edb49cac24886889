//! Experiment configuration, dispatch, and deterministic output emission.
