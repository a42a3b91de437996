//! Float functions that live in `std` but not in `core`, routed through
//! `libm` when building without `std`.

#[cfg(feature = "std")]
#[inline]
pub fn sqrt(x: f64) -> f64 {
    x.sqrt()
}

#[cfg(not(feature = "std"))]
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[cfg(feature = "std")]
#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    x.hypot(y)
}

#[cfg(not(feature = "std"))]
#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[cfg(feature = "std")]
#[inline]
pub fn powf(x: f64, p: f64) -> f64 {
    x.powf(p)
}

#[cfg(not(feature = "std"))]
#[inline]
pub fn powf(x: f64, p: f64) -> f64 {
    libm::pow(x, p)
}
