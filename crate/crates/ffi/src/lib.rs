//! C ABI surface for locbound.
