//! Float functions that live in std but not in core. With the `std`
//! feature they forward to std, otherwise to libm. sqrt is correctly
//! rounded in both, so results match bit for bit; the transcendentals may
//! differ in the last ulp between backends, which no consumer relies on.

macro_rules! shim {
    ($name:ident) => {
        #[cfg(feature = "std")]
        pub(crate) fn $name(x: f64) -> f64 {
            x.$name()
        }

        #[cfg(all(not(feature = "std"), feature = "libm"))]
        pub(crate) fn $name(x: f64) -> f64 {
            libm::$name(x)
        }
    };
}

shim!(sqrt);
shim!(cos);
shim!(exp);
