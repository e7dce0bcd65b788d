//! 2×2 matrices over a ring.

use super::scalar::{Ring, Q};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat2<T> {
    pub e: [[T; 2]; 2],
}

impl<T: Ring> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Mat2 { e: [[a, b], [c, d]] }
    }

    pub fn zero_from(t: &T) -> Self {
        let z = t.zero_like();
        Self::new(z.clone(), z.clone(), z.clone(), z)
    }

    pub fn identity_from(t: &T) -> Self {
        let z = t.zero_like();
        let o = t.one_like();
        Self::new(o.clone(), z.clone(), z, o)
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.e[i][j]
    }

    pub fn map<U: Ring>(&self, f: impl Fn(&T) -> U) -> Mat2<U> {
        Mat2::new(f(&self.e[0][0]), f(&self.e[0][1]), f(&self.e[1][0]), f(&self.e[1][1]))
    }

    pub fn try_map<U: Ring, E>(&self, f: impl Fn(&T) -> Result<U, E>) -> Result<Mat2<U>, E> {
        Ok(Mat2::new(f(&self.e[0][0])?, f(&self.e[0][1])?, f(&self.e[1][0])?, f(&self.e[1][1])?))
    }

    pub fn zip(&self, o: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        Mat2::new(
            f(&self.e[0][0], &o.e[0][0]),
            f(&self.e[0][1], &o.e[0][1]),
            f(&self.e[1][0], &o.e[1][0]),
            f(&self.e[1][1], &o.e[1][1]),
        )
    }

    pub fn trace(&self) -> T {
        self.e[0][0].add(&self.e[1][1])
    }

    pub fn det(&self) -> T {
        self.e[0][0].mul(&self.e[1][1]).sub(&self.e[0][1].mul(&self.e[1][0]))
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.e[0][0].clone(), self.e[1][0].clone(), self.e[0][1].clone(), self.e[1][1].clone())
    }

    pub fn commutator(&self, o: &Self) -> Self {
        Ring::sub(&Ring::mul(self, o), &Ring::mul(o, self))
    }

    pub fn scale_by(&self, c: &T) -> Self {
        self.map(|x| x.mul(c))
    }

    pub fn entries(&self) -> [&T; 4] {
        [&self.e[0][0], &self.e[0][1], &self.e[1][0], &self.e[1][1]]
    }
}

impl<T: Ring> Ring for Mat2<T> {
    fn zero_like(&self) -> Self {
        Mat2::zero_from(&self.e[0][0])
    }
    fn one_like(&self) -> Self {
        Mat2::identity_from(&self.e[0][0])
    }
    fn scalar_like(&self, c: &Q) -> Self {
        Mat2::identity_from(&self.e[0][0]).map(|x| x.scale(c))
    }
    fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.add(b))
    }
    fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.sub(b))
    }
    fn mul(&self, o: &Self) -> Self {
        let m = |i: usize, j: usize| self.e[i][0].mul(&o.e[0][j]).add(&self.e[i][1].mul(&o.e[1][j]));
        Mat2::new(m(0, 0), m(0, 1), m(1, 0), m(1, 1))
    }
    fn neg(&self) -> Self {
        self.map(|x| x.neg())
    }
    fn vanishes(&self) -> bool {
        self.entries().iter().all(|x| x.vanishes())
    }
    fn inv(&self) -> Option<Self> {
        let di = self.det().inv()?;
        Some(Mat2::new(self.e[1][1].clone(), self.e[0][1].neg(), self.e[1][0].neg(), self.e[0][0].clone()).map(|x| x.mul(&di)))
    }
    fn scale(&self, c: &Q) -> Self {
        self.map(|x| x.scale(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::scalar::qi;

    #[test]
    fn inverse_and_det() {
        let m = Mat2::new(qi(2), qi(1), qi(7), qi(4));
        assert_eq!(m.det(), qi(1));
        assert_eq!(m.mul(&m.inv().unwrap()), m.one_like());
        assert!(m.commutator(&m).vanishes());
    }
}
