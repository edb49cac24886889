//! Lieb-Robinson bounds and quasi-locality estimates.
