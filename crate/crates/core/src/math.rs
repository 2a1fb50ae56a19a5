//! Thin float helpers over `libm` so the crate builds without `std`.

pub(crate) const SPEED_OF_LIGHT: f64 = 3.0e8;

#[inline]
pub(crate) fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

#[inline]
pub(crate) fn linear_to_db(x: f64) -> f64 {
    10.0 * libm::log10(x)
}

/// Whole ticks needed to cover `duration`, rounding up. Durations that are
/// an integer multiple of `period` up to float noise map to that multiple.
pub(crate) fn ticks_ceil(duration: f64, period: f64) -> u32 {
    let ratio = duration / period;
    let nearest = libm::round(ratio);
    if libm::fabs(ratio - nearest) < 1e-9 {
        nearest as u32
    } else {
        libm::ceil(ratio) as u32
    }
}

pub(crate) fn is_tick_multiple(duration: f64, period: f64) -> bool {
    let ratio = duration / period;
    libm::fabs(ratio - libm::round(ratio)) < 1e-9
}
