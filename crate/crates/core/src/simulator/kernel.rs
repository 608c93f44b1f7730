use num_complex::Complex64;

pub(crate) fn apply_1q(amps: &mut [Complex64], qubit: usize, m: &[[Complex64; 2]; 2]) {
    let bit = 1usize << qubit;
    for i in 0..amps.len() {
        if i & bit == 0 {
            let j = i | bit;
            let (a0, a1) = (amps[i], amps[j]);
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[j] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

/// Applies `m` in the local basis `l = bit(q0) + 2·bit(q1)`.
pub(crate) fn apply_2q(amps: &mut [Complex64], q0: usize, q1: usize, m: &[[Complex64; 4]; 4]) {
    let (b0, b1) = (1usize << q0, 1usize << q1);
    for i in 0..amps.len() {
        if i & (b0 | b1) == 0 {
            let idx = [i, i | b0, i | b1, i | b0 | b1];
            let v = idx.map(|k| amps[k]);
            for (r, &k) in idx.iter().enumerate() {
                amps[k] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
            }
        }
    }
}

pub(crate) fn conj1(m: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    m.map(|row| row.map(|v| v.conj()))
}

pub(crate) fn conj2(m: &[[Complex64; 4]; 4]) -> [[Complex64; 4]; 4] {
    m.map(|row| row.map(|v| v.conj()))
}
