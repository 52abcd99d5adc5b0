//! Exact rationals with an `i64` fast path that promotes to big integers on
//! overflow.

use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num::rational::Ratio;
use num::traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub};
use num::{BigInt, One, Signed, ToPrimitive, Zero};

use crate::linear::Rat;

#[derive(Clone, Debug)]
pub(crate) enum Q {
    S(Ratio<i64>),
    B(Rat),
}

impl Q {
    pub fn zero() -> Q {
        Q::S(Ratio::zero())
    }

    pub fn one() -> Q {
        Q::S(Ratio::one())
    }

    pub fn from_rat(r: &Rat) -> Q {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Q::S(Ratio::new_raw(n, d)),
            _ => Q::B(r.clone()),
        }
    }

    pub fn to_rat(&self) -> Rat {
        match self {
            Q::S(r) => Rat::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom())),
            Q::B(r) => r.clone(),
        }
    }

    fn big(&self) -> Rat {
        self.to_rat()
    }

    fn norm(r: Rat) -> Q {
        Q::from_rat(&r)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Q::S(r) => r.is_zero(),
            Q::B(r) => r.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Q::S(r) => r.is_one(),
            Q::B(r) => r.is_one(),
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Q::S(r) => r.is_positive(),
            Q::B(r) => r.is_positive(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Q::S(r) => r.is_negative(),
            Q::B(r) => r.is_negative(),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl $tr<&Q> for &Q {
            type Output = Q;
            fn $m(self, o: &Q) -> Q {
                if let (Q::S(a), Q::S(b)) = (self, o) {
                    if let Some(r) = a.$checked(b) {
                        return Q::S(r);
                    }
                }
                Q::norm(self.big().$m(o.big()))
            }
        }

        impl $tr<&Q> for Q {
            type Output = Q;
            fn $m(self, o: &Q) -> Q {
                (&self).$m(o)
            }
        }

        impl $tr<Q> for &Q {
            type Output = Q;
            fn $m(self, o: Q) -> Q {
                self.$m(&o)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);
binop!(Div, div, checked_div);

impl AddAssign<&Q> for Q {
    fn add_assign(&mut self, o: &Q) {
        *self = &*self + o;
    }
}

impl AddAssign<Q> for Q {
    fn add_assign(&mut self, o: Q) {
        *self = &*self + &o;
    }
}

impl SubAssign<&Q> for Q {
    fn sub_assign(&mut self, o: &Q) {
        *self = &*self - o;
    }
}

impl SubAssign<Q> for Q {
    fn sub_assign(&mut self, o: Q) {
        *self = &*self - &o;
    }
}

impl MulAssign<&Q> for Q {
    fn mul_assign(&mut self, o: &Q) {
        *self = &*self * o;
    }
}

impl Neg for Q {
    type Output = Q;
    fn neg(self) -> Q {
        -&self
    }
}

impl Neg for &Q {
    type Output = Q;
    fn neg(self) -> Q {
        match self {
            Q::S(r) if *r.numer() != i64::MIN => Q::S(-r),
            _ => Q::norm(-self.big()),
        }
    }
}

impl PartialEq for Q {
    fn eq(&self, o: &Q) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl Eq for Q {}

impl PartialOrd for Q {
    fn partial_cmp(&self, o: &Q) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Q {
    fn cmp(&self, o: &Q) -> Ordering {
        match (self, o) {
            (Q::S(a), Q::S(b)) => {
                // Denominators are positive; cross-multiply in i128.
                let l = *a.numer() as i128 * *b.denom() as i128;
                let r = *b.numer() as i128 * *a.denom() as i128;
                l.cmp(&r)
            }
            _ => self.big().cmp(&o.big()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::{rat, ratio};

    #[test]
    fn overflow_promotes() {
        let big = Q::from_rat(&rat(i64::MAX));
        let s = &big + &Q::one();
        assert!(matches!(s, Q::B(_)));
        assert_eq!(s.to_rat(), rat(i64::MAX) + rat(1));
        let back = &s - &Q::one();
        assert!(matches!(back, Q::S(_)));
        assert_eq!(back.to_rat(), rat(i64::MAX));
    }

    #[test]
    fn small_arithmetic() {
        let a = Q::from_rat(&ratio(3, 4));
        let b = Q::from_rat(&ratio(-5, 6));
        assert_eq!((&a * &b).to_rat(), ratio(-5, 8));
        assert_eq!((&a / &b).to_rat(), ratio(-9, 10));
        assert_eq!((&a - &b).to_rat(), ratio(19, 12));
        assert!(b < a);
        assert_eq!((-&b).to_rat(), ratio(5, 6));
        let m = Q::from_rat(&rat(i64::MIN));
        assert_eq!((-&m).to_rat(), -rat(i64::MIN));
    }
}
