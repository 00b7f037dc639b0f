use crate::scalar::Real;

/// Cardinal cubic B-spline centred at 0 with support `(-2, 2)`.
pub fn cubic_bspline<T: Real>(t: T) -> T {
    let a = t.abs();
    let one = T::one();
    let two = T::lit(2.0);
    if a >= two {
        T::zero()
    } else if a >= one {
        let r = two - a;
        r * r * r / T::lit(6.0)
    } else {
        T::lit(2.0 / 3.0) - a * a + a * a * a / two
    }
}

/// First derivative of [`cubic_bspline`].
pub fn cubic_bspline_deriv<T: Real>(t: T) -> T {
    let a = t.abs();
    let two = T::lit(2.0);
    let d = if a >= two {
        T::zero()
    } else if a >= T::one() {
        let r = two - a;
        -r * r / two
    } else {
        -two * a + T::lit(1.5) * a * a
    };
    if t < T::zero() {
        -d
    } else {
        d
    }
}
