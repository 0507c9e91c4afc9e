//! Lattice direction sets. Index 0 is the rest direction, followed by the six
//! axis directions and (for D3Q19) the twelve face diagonals; opposite
//! directions occupy adjacent slots.

pub const Q19: usize = 19;
pub const Q7: usize = 7;

pub const D3Q19_C: [[i32; 3]; Q19] = [
    [0, 0, 0],
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
    [1, 1, 0],
    [-1, -1, 0],
    [1, -1, 0],
    [-1, 1, 0],
    [1, 0, 1],
    [-1, 0, -1],
    [1, 0, -1],
    [-1, 0, 1],
    [0, 1, 1],
    [0, -1, -1],
    [0, 1, -1],
    [0, -1, 1],
];

const W0: f64 = 1.0 / 3.0;
const W1: f64 = 1.0 / 18.0;
const W2: f64 = 1.0 / 36.0;

pub const D3Q19_W: [f64; Q19] = [
    W0, W1, W1, W1, W1, W1, W1, W2, W2, W2, W2, W2, W2, W2, W2, W2, W2, W2, W2,
];

pub const D3Q19_INV: [usize; Q19] = inverse_table::<Q19>();

pub const D3Q7_C: [[i32; 3]; Q7] = [
    [0, 0, 0],
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
];

pub const D3Q7_W: [f64; Q7] = [1.0 / 4.0, 1.0 / 8.0, 1.0 / 8.0, 1.0 / 8.0, 1.0 / 8.0, 1.0 / 8.0, 1.0 / 8.0];

pub const D3Q7_INV: [usize; Q7] = inverse_table::<Q7>();

const fn inverse_table<const N: usize>() -> [usize; N] {
    let mut inv = [0usize; N];
    let mut q = 1;
    while q < N {
        inv[q] = if q % 2 == 1 { q + 1 } else { q - 1 };
        q += 1;
    }
    inv
}

/// Direction vectors, weights and inverse-direction table of a stencil.
#[derive(Debug, Clone, Copy)]
pub struct DirectionSet {
    pub c: &'static [[i32; 3]],
    pub w: &'static [f64],
    pub inv: &'static [usize],
}

impl DirectionSet {
    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }
}

pub const D3Q19: DirectionSet = DirectionSet {
    c: &D3Q19_C,
    w: &D3Q19_W,
    inv: &D3Q19_INV,
};

pub const D3Q7: DirectionSet = DirectionSet {
    c: &D3Q7_C,
    w: &D3Q7_W,
    inv: &D3Q7_INV,
};
