//! Dense per-slot state: band selections, transmit powers and power gains.

/// Binary N x m band selection matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationMatrix {
    n_users: usize,
    n_bands: usize,
    a: Vec<bool>,
}

impl AllocationMatrix {
    pub fn empty(n_users: usize, n_bands: usize) -> Self {
        AllocationMatrix {
            n_users,
            n_bands,
            a: vec![false; n_users * n_bands],
        }
    }

    /// Builds a matrix from one band list per user.
    pub fn from_selections(n_bands: usize, selections: &[Vec<usize>]) -> Self {
        let mut m = AllocationMatrix::empty(selections.len(), n_bands);
        for (i, sel) in selections.iter().enumerate() {
            m.set_row(i, sel);
        }
        m
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_bands(&self) -> usize {
        self.n_bands
    }

    #[inline]
    pub fn get(&self, user: usize, band: usize) -> bool {
        self.a[user * self.n_bands + band]
    }

    #[inline]
    pub fn set(&mut self, user: usize, band: usize, on: bool) {
        self.a[user * self.n_bands + band] = on;
    }

    /// Replaces a user's row with the given band list.
    pub fn set_row(&mut self, user: usize, bands: &[usize]) {
        let row = &mut self.a[user * self.n_bands..(user + 1) * self.n_bands];
        row.fill(false);
        for &b in bands {
            row[b] = true;
        }
    }

    /// Bands selected by `user`, ascending.
    pub fn selection(&self, user: usize) -> Vec<usize> {
        (0..self.n_bands).filter(|&j| self.get(user, j)).collect()
    }

    pub fn row_count(&self, user: usize) -> usize {
        self.a[user * self.n_bands..(user + 1) * self.n_bands]
            .iter()
            .filter(|&&x| x)
            .count()
    }
}

/// Nonnegative N x m transmit powers in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerMatrix {
    n_users: usize,
    n_bands: usize,
    p_w: Vec<f64>,
}

impl PowerMatrix {
    pub fn zeros(n_users: usize, n_bands: usize) -> Self {
        PowerMatrix {
            n_users,
            n_bands,
            p_w: vec![0.0; n_users * n_bands],
        }
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_bands(&self) -> usize {
        self.n_bands
    }

    #[inline]
    pub fn get(&self, user: usize, band: usize) -> f64 {
        self.p_w[user * self.n_bands + band]
    }

    #[inline]
    pub fn set(&mut self, user: usize, band: usize, watts: f64) {
        self.p_w[user * self.n_bands + band] = watts;
    }

    /// Zeroes the user's row, then writes `powers[k]` on `bands[k]`.
    pub fn set_row(&mut self, user: usize, bands: &[usize], powers: &[f64]) {
        debug_assert_eq!(bands.len(), powers.len());
        let row = &mut self.p_w[user * self.n_bands..(user + 1) * self.n_bands];
        row.fill(0.0);
        for (&b, &p) in bands.iter().zip(powers) {
            row[b] = p;
        }
    }

    pub fn row(&self, user: usize) -> &[f64] {
        &self.p_w[user * self.n_bands..(user + 1) * self.n_bands]
    }

    pub fn total(&self, user: usize) -> f64 {
        self.row(user).iter().sum()
    }
}

/// Power gains |h_ik^(j)|^2, receiver i, transmitter k, band j.
#[derive(Debug, Clone, PartialEq)]
pub struct Gains {
    n_users: usize,
    n_bands: usize,
    g: Vec<f64>,
}

impl Gains {
    pub fn zeros(n_users: usize, n_bands: usize) -> Self {
        Gains {
            n_users,
            n_bands,
            g: vec![0.0; n_users * n_users * n_bands],
        }
    }

    /// Wraps a flat `[rx][tx][band]` buffer.
    pub fn from_vec(n_users: usize, n_bands: usize, g: Vec<f64>) -> Self {
        assert_eq!(g.len(), n_users * n_users * n_bands, "gain buffer size");
        Gains { n_users, n_bands, g }
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_bands(&self) -> usize {
        self.n_bands
    }

    #[inline]
    pub fn index(&self, rx: usize, tx: usize, band: usize) -> usize {
        (rx * self.n_users + tx) * self.n_bands + band
    }

    #[inline]
    pub fn get(&self, rx: usize, tx: usize, band: usize) -> f64 {
        self.g[self.index(rx, tx, band)]
    }

    #[inline]
    pub fn set(&mut self, rx: usize, tx: usize, band: usize, value: f64) {
        let idx = self.index(rx, tx, band);
        self.g[idx] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.g
    }
}
