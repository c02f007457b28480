use std::marker::PhantomData;

/// Global coordinates of one scalar product `A(row, inner) * B(inner, col)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ProductIndex {
    pub row: usize,
    pub inner: usize,
    pub col: usize,
}

/// Semiring supplied to `spgemm` as three pure callbacks.
///
/// `add` must be associative and commutative: distributed products combine
/// partial sums in a grid-dependent order.
pub trait Semiring {
    type Left;
    type Right;
    type Out;

    fn multiply(&self, a: &Self::Left, b: &Self::Right, at: ProductIndex) -> Self::Out;

    fn add(&self, acc: &mut Self::Out, x: Self::Out);

    /// Products for which this returns false are discarded before `add`.
    fn filter(&self, _a: &Self::Left, _b: &Self::Right, _at: ProductIndex) -> bool {
        true
    }
}

/// Counts structural products, ignoring payloads.
pub struct Counting<L, R>(PhantomData<fn(&L, &R)>);

impl<L, R> Counting<L, R> {
    pub fn new() -> Self {
        Counting(PhantomData)
    }
}

impl<L, R> Default for Counting<L, R> {
    fn default() -> Self {
        Self::new()
    }
}

impl<L, R> Semiring for Counting<L, R> {
    type Left = L;
    type Right = R;
    type Out = u64;

    fn multiply(&self, _a: &L, _b: &R, _at: ProductIndex) -> u64 {
        1
    }

    fn add(&self, acc: &mut u64, x: u64) {
        *acc += x;
    }
}
