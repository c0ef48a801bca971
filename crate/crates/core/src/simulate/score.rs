use crate::lasso::InteractionMatrix;

/// Detection rates of an estimated interaction matrix against the truth. Rates with
/// an empty denominator are `None`. Off-diagonal entries are counted over ordered
/// pairs, so asymmetric estimates are scored entry by entry.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Rates {
    pub tp: Option<f64>,
    pub fp: Option<f64>,
    pub intra_tp: Option<f64>,
    pub intra_fp: Option<f64>,
    pub inter_tp: Option<f64>,
    pub inter_fp: Option<f64>,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    hit: usize,
    pos: usize,
    false_hit: usize,
    neg: usize,
}

impl Tally {
    fn add(&mut self, est: bool, truth: bool) {
        if truth {
            self.pos += 1;
            self.hit += usize::from(est);
        } else {
            self.neg += 1;
            self.false_hit += usize::from(est);
        }
    }

    fn merge(self, o: Tally) -> Tally {
        Tally {
            hit: self.hit + o.hit,
            pos: self.pos + o.pos,
            false_hit: self.false_hit + o.false_hit,
            neg: self.neg + o.neg,
        }
    }

    fn tp(&self) -> Option<f64> {
        (self.pos > 0).then(|| self.hit as f64 / self.pos as f64)
    }

    fn fp(&self) -> Option<f64> {
        (self.neg > 0).then(|| self.false_hit as f64 / self.neg as f64)
    }
}

pub fn score(estimate: &InteractionMatrix, truth: &InteractionMatrix) -> Rates {
    assert_eq!(estimate.p(), truth.p(), "matrix sizes differ");
    let p = truth.p();
    let mut intra = Tally::default();
    let mut inter = Tally::default();
    for i in 0..p {
        for j in 0..p {
            let t = if i == j { &mut intra } else { &mut inter };
            t.add(estimate.get(i, j), truth.get(i, j));
        }
    }
    let all = intra.merge(inter);
    Rates {
        tp: all.tp(),
        fp: all.fp(),
        intra_tp: intra.tp(),
        intra_fp: intra.fp(),
        inter_tp: inter.tp(),
        inter_fp: inter.fp(),
    }
}
