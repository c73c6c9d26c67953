use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorState {
    pub weight: f64,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorList {
    Destroy,
    Repair,
}

/// Adaptive weights of the destroy and repair operators.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBank {
    pub destroy: Vec<OperatorState>,
    pub repair: Vec<OperatorState>,
}

impl OperatorBank {
    /// All weights start at 1.
    pub fn new(n_destroy: usize, n_repair: usize) -> Self {
        let init = OperatorState {
            weight: 1.0,
            score: 0.0,
        };
        Self {
            destroy: vec![init; n_destroy],
            repair: vec![init; n_repair],
        }
    }

    fn list(&self, which: OperatorList) -> &[OperatorState] {
        match which {
            OperatorList::Destroy => &self.destroy,
            OperatorList::Repair => &self.repair,
        }
    }

    fn list_mut(&mut self, which: OperatorList) -> &mut Vec<OperatorState> {
        match which {
            OperatorList::Destroy => &mut self.destroy,
            OperatorList::Repair => &mut self.repair,
        }
    }

    /// Selection probabilities `w_i / Σ w`.
    pub fn probabilities(&self, which: OperatorList) -> Vec<f64> {
        let list = self.list(which);
        let total: f64 = list.iter().map(|o| o.weight).sum();
        list.iter().map(|o| o.weight / total).collect()
    }

    /// Roulette-wheel selection.
    pub fn select<R: Rng + ?Sized>(&self, which: OperatorList, rng: &mut R) -> usize {
        let list = self.list(which);
        assert!(!list.is_empty(), "operator list is empty");
        let total: f64 = list.iter().map(|o| o.weight).sum();
        let mut u = rng.gen::<f64>() * total;
        for (i, o) in list.iter().enumerate() {
            if u < o.weight {
                return i;
            }
            u -= o.weight;
        }
        list.len() - 1
    }

    /// `w ← w·δ + (1 − δ)·s` for the chosen operator only.
    pub fn update(&mut self, which: OperatorList, id: usize, score: f64, delta: f64) {
        let op = &mut self.list_mut(which)[id];
        op.score = score;
        op.weight = op.weight * delta + (1.0 - delta) * score;
    }
}

/// Metropolis acceptance: improvements and ties always pass, a worse candidate
/// passes with probability `exp(−Δ/T)`.
pub fn sa_accept<R: Rng + ?Sized>(
    current: f64,
    candidate: f64,
    temperature: f64,
    rng: &mut R,
) -> bool {
    if candidate <= current {
        return true;
    }
    let p = (-(candidate - current) / temperature).exp();
    rng.gen::<f64>() < p
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn probabilities_follow_weights() {
        let mut bank = OperatorBank::new(3, 1);
        bank.destroy[2].weight = 2.0;
        assert_eq!(
            bank.probabilities(OperatorList::Destroy),
            vec![0.25, 0.25, 0.5]
        );
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(bank.select(OperatorList::Repair, &mut rng), 0);
        }
    }

    #[test]
    fn weight_update_arithmetic() {
        let mut bank = OperatorBank::new(2, 2);
        bank.update(OperatorList::Destroy, 0, 7.0, 0.1);
        assert!((bank.destroy[0].weight - 6.4).abs() < 1e-12);
        assert_eq!(bank.destroy[1].weight, 1.0);
        assert_eq!(bank.repair, OperatorBank::new(2, 2).repair);
        bank.update(OperatorList::Repair, 1, 9.0, 1.0);
        assert_eq!(bank.repair[1].weight, 1.0);
        bank.update(OperatorList::Repair, 0, 9.0, 0.0);
        assert_eq!(bank.repair[0].weight, 9.0);
    }

    #[test]
    fn uniform_selection_chi_square() {
        let bank = OperatorBank::new(6, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let mut counts = [0usize; 6];
        for _ in 0..n {
            counts[bank.select(OperatorList::Destroy, &mut rng)] += 1;
        }
        let expected = n as f64 / 6.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // Critical value of chi-square with 5 degrees of freedom at alpha = 0.01.
        assert!(chi2 < 15.086, "chi2 = {chi2}");
    }

    #[test]
    fn acceptance_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!(sa_accept(10.0, 10.0, 1e-9, &mut rng));
        assert!(sa_accept(10.0, 5.0, 1e-9, &mut rng));
        assert!(!sa_accept(0.0, 100.0, 1e-9, &mut rng));
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| sa_accept(0.0, 5.0, 5.0, &mut rng))
            .count();
        let p = hits as f64 / n as f64;
        assert!((p - (-1.0f64).exp()).abs() < 0.01, "p = {p}");
    }
}
