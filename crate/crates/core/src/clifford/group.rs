use crate::tensor::ComplexTensor;
use crate::C64;
use std::collections::{HashMap, VecDeque};
use std::sync::OnceLock;

/// Generators of the two-qubit Clifford group. Qubit 0 is the left (more
/// significant) one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    H0,
    H1,
    S0,
    S1,
    /// Control on qubit 0.
    Cnot01,
}

impl Generator {
    const ALL: [Generator; 5] = [Self::H0, Self::H1, Self::S0, Self::S1, Self::Cnot01];

    fn matrix(self) -> ComplexTensor {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64, im: f64| C64::new(re, im);
        let one = ComplexTensor::identity(2);
        let had = ComplexTensor::matrix(2, 2, vec![c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.)]).unwrap();
        let s = ComplexTensor::from_diag(&[c(1., 0.), c(0., 1.)]);
        match self {
            Self::H0 => had.kron(&one).unwrap(),
            Self::H1 => one.kron(&had).unwrap(),
            Self::S0 => s.kron(&one).unwrap(),
            Self::S1 => one.kron(&s).unwrap(),
            Self::Cnot01 => crate::circuit::cnot_gate(),
        }
    }
}

/// The two-qubit Clifford group modulo global phase, 11520 elements.
pub struct CliffordGroup {
    unitaries: Vec<ComplexTensor>,
    /// Generators applied first to last.
    words: Vec<Vec<Generator>>,
    index: HashMap<Vec<i64>, usize>,
}

/// Phase-free hashable fingerprint: first sizeable entry made real
/// positive, entries rounded to 1e-6.
fn key(u: &ComplexTensor) -> Vec<i64> {
    let pivot = u.data().iter().find(|z| z.norm() > 1e-3).copied().unwrap_or(C64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    u.data()
        .iter()
        .flat_map(|z| {
            let w = z * phase;
            [(w.re * 1e6).round() as i64, (w.im * 1e6).round() as i64]
        })
        .collect()
}

impl CliffordGroup {
    fn generate() -> Self {
        let gens: Vec<(Generator, ComplexTensor)> = Generator::ALL.iter().map(|&g| (g, g.matrix())).collect();
        let id = ComplexTensor::identity(4);
        let mut out = Self {
            index: HashMap::from([(key(&id), 0)]),
            unitaries: vec![id],
            words: vec![vec![]],
        };
        let mut queue = VecDeque::from([0usize]);
        while let Some(k) = queue.pop_front() {
            for (g, m) in &gens {
                let next = m.matmul(&out.unitaries[k]).unwrap();
                let kk = key(&next);
                if out.index.contains_key(&kk) {
                    continue;
                }
                let mut word = out.words[k].clone();
                word.push(*g);
                out.index.insert(kk, out.unitaries.len());
                queue.push_back(out.unitaries.len());
                out.unitaries.push(next);
                out.words.push(word);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    pub fn unitary(&self, index: usize) -> ComplexTensor {
        self.unitaries[index].clone()
    }

    pub fn word(&self, index: usize) -> &[Generator] {
        &self.words[index]
    }

    /// Index of `u` up to a global phase.
    pub fn find(&self, u: &ComplexTensor) -> Option<usize> {
        if u.shape() != [4, 4] {
            return None;
        }
        let i = *self.index.get(&key(u))?;
        // Rounding may collide only with an equal matrix; confirm anyway.
        let v = &self.unitaries[i];
        let overlap: C64 = v.data().iter().zip(u.data()).map(|(a, b)| a.conj() * b).sum();
        (overlap.norm() > 4.0 - 1e-6).then_some(i)
    }
}

/// The group, built on first use.
pub fn two_qubit_group() -> &'static CliffordGroup {
    static GROUP: OnceLock<CliffordGroup> = OnceLock::new();
    GROUP.get_or_init(CliffordGroup::generate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{swap_gate, UNITARITY_TOL};

    #[test]
    fn group_order() {
        assert_eq!(two_qubit_group().len(), 11520);
    }

    #[test]
    fn words_reproduce_unitaries() {
        let g = two_qubit_group();
        for i in (0..g.len()).step_by(97) {
            let mut u = ComplexTensor::identity(4);
            for gen in g.word(i) {
                u = gen.matrix().matmul(&u).unwrap();
            }
            assert!(u.max_abs_diff(&g.unitary(i)) < 1e-12);
            assert!(g.unitary(i).unitarity_residual() < UNITARITY_TOL);
            assert_eq!(g.find(&u.scale(C64::from_polar(1.0, 0.7))), Some(i));
        }
    }

    #[test]
    fn finds_swap_but_not_t_gate() {
        let g = two_qubit_group();
        assert!(g.find(&swap_gate(2)).is_some());
        let t = ComplexTensor::from_diag(&[
            C64::new(1.0, 0.0),
            C64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
            C64::new(1.0, 0.0),
            C64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
        ]);
        assert!(g.find(&t).is_none());
    }
}
