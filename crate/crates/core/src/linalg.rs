//! Dense linear algebra over F_b (b prime) on row vectors of residues.

fn inv_mod(a: u64, b: u64) -> u64 {
    let mut acc = 1u64;
    let mut base = a % b;
    let mut e = b - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % b;
        }
        base = base * base % b;
        e >>= 1;
    }
    acc
}

/// Reduced row echelon form. Returns the nonzero rows and their pivot columns.
pub(crate) fn rref(rows: &[Vec<u64>], b: u64) -> (Vec<Vec<u64>>, Vec<usize>) {
    let mut a: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|&x| x % b).collect()).collect();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| a[i][c] != 0) else { continue };
        a.swap(r, p);
        let inv = inv_mod(a[r][c], b);
        for x in a[r].iter_mut() {
            *x = *x * inv % b;
        }
        let pivot = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let f = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot) {
                    *x = (*x + (b - f) * y) % b;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

pub(crate) fn rank(rows: &[Vec<u64>], b: u64) -> usize {
    rref(rows, b).1.len()
}

/// Basis of {x : M x = 0} where `m` holds the rows of M and `cols` is the length of x.
pub(crate) fn kernel(m: &[Vec<u64>], cols: usize, b: u64) -> Vec<Vec<u64>> {
    let (red, pivots) = rref(m, b);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![0u64; cols];
            x[f] = 1;
            for (row, &pc) in red.iter().zip(&pivots) {
                x[pc] = (b - row[f]) % b;
            }
            x
        })
        .collect()
}

pub(crate) fn mat_vec(m: &[Vec<u64>], x: &[u64], b: u64) -> Vec<u64> {
    m.iter()
        .map(|row| row.iter().zip(x).map(|(&a, &v)| a * v % b).sum::<u64>() % b)
        .collect()
}

/// Iterate over all F_b-linear combinations of `basis`, calling `f` on each vector.
pub(crate) fn for_each_combination(basis: &[Vec<u64>], len: usize, b: u64, mut f: impl FnMut(&[u64])) {
    let k = basis.len();
    let mut coef = vec![0u64; k];
    let mut v = vec![0u64; len];
    loop {
        f(&v);
        // odometer step: increment coefficient i, update v incrementally
        let mut i = 0;
        loop {
            if i == k {
                return;
            }
            coef[i] += 1;
            for (x, &e) in v.iter_mut().zip(&basis[i]) {
                *x = (*x + e) % b;
            }
            if coef[i] < b {
                break;
            }
            // coef wrapped back to 0: v has been restored by b additions
            coef[i] = 0;
            i += 1;
        }
    }
}
