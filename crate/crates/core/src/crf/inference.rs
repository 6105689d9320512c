//! Exact inference over a linear chain of tag potentials.
//!
//! All recursions run in log space. Each step factors the running maximum out
//! of the log-sum-exp and multiplies by `exp(transition - max_transition)`, so
//! no intermediate exceeds 1 and `-inf` transitions contribute exactly zero.

use crate::error::{Error, Result};

/// Log-potentials of one sequence: `emissions` is `len × num_tags` row-major,
/// `transitions[prev * num_tags + next]`, plus begin and end vectors.
#[derive(Debug, Clone, Copy)]
pub struct Potentials<'a> {
    num_tags: usize,
    emissions: &'a [f64],
    transitions: &'a [f64],
    start: &'a [f64],
    end: &'a [f64],
}

impl<'a> Potentials<'a> {
    pub fn new(
        num_tags: usize,
        emissions: &'a [f64],
        transitions: &'a [f64],
        start: &'a [f64],
        end: &'a [f64],
    ) -> Result<Self> {
        if num_tags == 0
            || emissions.len() % num_tags != 0
            || transitions.len() != num_tags * num_tags
            || start.len() != num_tags
            || end.len() != num_tags
        {
            return Err(Error::Structural(format!(
                "potential shapes do not agree with {num_tags} tags"
            )));
        }
        Ok(Potentials {
            num_tags,
            emissions,
            transitions,
            start,
            end,
        })
    }

    pub fn num_tags(&self) -> usize {
        self.num_tags
    }

    /// Sequence length.
    pub fn len(&self) -> usize {
        self.emissions.len() / self.num_tags
    }

    pub fn is_empty(&self) -> bool {
        self.emissions.is_empty()
    }

    fn row(&self, t: usize) -> &'a [f64] {
        &self.emissions[t * self.num_tags..(t + 1) * self.num_tags]
    }

    fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::Structural("inference on a zero-length sequence".into()))
        } else {
            Ok(())
        }
    }

    /// Transition exponentials shifted by the largest finite transition.
    fn exp_transitions(&self) -> (f64, Vec<f64>) {
        let shift = self
            .transitions
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        let shift = if shift.is_finite() { shift } else { 0.0 };
        (shift, self.transitions.iter().map(|v| (v - shift).exp()).collect())
    }
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = max_of(xs);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn check_log_z(log_z: f64) -> Result<f64> {
    if log_z.is_nan() || log_z == f64::INFINITY {
        Err(Error::Numeric(format!("log partition is {log_z}")))
    } else if log_z == f64::NEG_INFINITY {
        Err(Error::Structural("no tag path has finite score".into()))
    } else {
        Ok(log_z)
    }
}

/// Unnormalized log-score of a tag path, begin and end transitions included.
pub fn score_path(p: &Potentials<'_>, path: &[usize]) -> Result<f64> {
    if path.len() != p.len() {
        return Err(Error::Structural(format!(
            "path of length {} for a sequence of length {}",
            path.len(),
            p.len()
        )));
    }
    if let Some(&bad) = path.iter().find(|&&y| y >= p.num_tags) {
        return Err(Error::Structural(format!("tag id {bad} out of range")));
    }
    let Some((&first, _)) = path.split_first() else {
        return Ok(0.0);
    };
    let l = p.num_tags;
    let mut score = p.start[first] + p.end[path[path.len() - 1]];
    for (t, &y) in path.iter().enumerate() {
        score += p.emissions[t * l + y];
        if t > 0 {
            score += p.transitions[path[t - 1] * l + y];
        }
    }
    Ok(score)
}

/// Forward table: `alpha[t][y]` is the log-sum of all prefixes ending in `y` at `t`.
#[derive(Debug, Clone)]
pub struct ForwardTable {
    pub alpha: Vec<f64>,
    pub log_z: f64,
}

pub fn forward(p: &Potentials<'_>) -> Result<ForwardTable> {
    p.require_nonempty()?;
    let (shift, exp_trans) = p.exp_transitions();
    forward_with(p, shift, &exp_trans)
}

fn forward_with(p: &Potentials<'_>, shift: f64, exp_trans: &[f64]) -> Result<ForwardTable> {
    let (l, len) = (p.num_tags, p.len());
    let mut alpha = vec![f64::NEG_INFINITY; len * l];
    for y in 0..l {
        alpha[y] = p.start[y] + p.emissions[y];
    }
    let mut w = vec![0.0; l];
    for t in 1..len {
        let (done, rest) = alpha.split_at_mut(t * l);
        let prev = &done[(t - 1) * l..];
        let m = max_of(prev);
        if m == f64::NEG_INFINITY {
            break;
        }
        for (wa, &pa) in w.iter_mut().zip(prev) {
            *wa = (pa - m).exp();
        }
        let cur = &mut rest[..l];
        let emit = p.row(t);
        for b in 0..l {
            let s: f64 = (0..l).map(|a| w[a] * exp_trans[a * l + b]).sum();
            cur[b] = emit[b] + m + shift + s.ln();
        }
    }
    let last = &alpha[(len - 1) * l..];
    let closing: Vec<f64> = last.iter().zip(p.end).map(|(a, e)| a + e).collect();
    let log_z = check_log_z(log_sum_exp(&closing))?;
    Ok(ForwardTable { alpha, log_z })
}

/// Backward table: `beta[t][y]` is the log-sum of all suffixes after `t` given `y` at `t`.
pub fn backward(p: &Potentials<'_>) -> Result<Vec<f64>> {
    p.require_nonempty()?;
    let (shift, exp_trans) = p.exp_transitions();
    Ok(backward_with(p, shift, &exp_trans))
}

fn backward_with(p: &Potentials<'_>, shift: f64, exp_trans: &[f64]) -> Vec<f64> {
    let (l, len) = (p.num_tags, p.len());
    let mut beta = vec![f64::NEG_INFINITY; len * l];
    beta[(len - 1) * l..].copy_from_slice(p.end);
    let mut r = vec![0.0; l];
    for t in (0..len - 1).rev() {
        let (head, tail) = beta.split_at_mut((t + 1) * l);
        let next = &tail[..l];
        let emit = p.row(t + 1);
        let q: Vec<f64> = emit.iter().zip(next).map(|(e, b)| e + b).collect();
        let m = max_of(&q);
        if m == f64::NEG_INFINITY {
            continue;
        }
        for (rb, qb) in r.iter_mut().zip(&q) {
            *rb = (qb - m).exp();
        }
        let cur = &mut head[t * l..];
        for (a, slot) in cur.iter_mut().enumerate() {
            let s: f64 = (0..l).map(|b| exp_trans[a * l + b] * r[b]).sum();
            *slot = m + shift + s.ln();
        }
    }
    beta
}

pub fn log_partition(p: &Potentials<'_>) -> Result<f64> {
    Ok(forward(p)?.log_z)
}

/// Highest-scoring path and its score.
///
/// Ties go to the lowest tag id, both at each backpointer and at the final
/// position; the result is the optimal path that is smallest when compared
/// from the last position backwards.
pub fn viterbi(p: &Potentials<'_>) -> Result<(Vec<usize>, f64)> {
    p.require_nonempty()?;
    let (l, len) = (p.num_tags, p.len());
    let mut delta: Vec<f64> = (0..l).map(|y| p.start[y] + p.emissions[y]).collect();
    let mut next = vec![0.0; l];
    let mut back = vec![0usize; len * l];
    for t in 1..len {
        let emit = p.row(t);
        for b in 0..l {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for (a, &d) in delta.iter().enumerate() {
                let v = d + p.transitions[a * l + b];
                if v > best {
                    best = v;
                    arg = a;
                }
            }
            next[b] = best + emit[b];
            back[t * l + b] = arg;
        }
        std::mem::swap(&mut delta, &mut next);
    }
    let mut best = f64::NEG_INFINITY;
    let mut last = 0;
    for y in 0..l {
        let v = delta[y] + p.end[y];
        if v > best {
            best = v;
            last = y;
        }
    }
    if best.is_nan() || best == f64::INFINITY {
        return Err(Error::Numeric(format!("best path score is {best}")));
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::Structural("no tag path has finite score".into()));
    }
    let mut path = vec![0; len];
    path[len - 1] = last;
    for t in (1..len).rev() {
        path[t - 1] = back[t * l + path[t]];
    }
    Ok((path, best))
}

/// Per-position posterior tag probabilities, `len × num_tags` row-major.
pub fn marginals(p: &Potentials<'_>) -> Result<Vec<f64>> {
    Ok(posteriors(p, false)?.unary)
}

/// Posterior statistics needed by the likelihood gradient.
#[derive(Debug, Clone)]
pub struct Posteriors {
    pub log_z: f64,
    /// `len × num_tags` posterior marginals.
    pub unary: Vec<f64>,
    /// Expected transition counts summed over positions, `num_tags × num_tags`;
    /// empty unless requested.
    pub pairwise: Vec<f64>,
}

pub fn posteriors(p: &Potentials<'_>, with_pairwise: bool) -> Result<Posteriors> {
    p.require_nonempty()?;
    let (l, len) = (p.num_tags, p.len());
    let (shift, exp_trans) = p.exp_transitions();
    let fwd = forward_with(p, shift, &exp_trans)?;
    let beta = backward_with(p, shift, &exp_trans);
    let log_z = fwd.log_z;
    let alpha = fwd.alpha;

    let unary: Vec<f64> = alpha
        .iter()
        .zip(&beta)
        .map(|(a, b)| (a + b - log_z).exp())
        .collect();

    let mut pairwise = Vec::new();
    if with_pairwise {
        pairwise = vec![0.0; l * l];
        let mut wa = vec![0.0; l];
        let mut wb = vec![0.0; l];
        let mut q = vec![0.0; l];
        for t in 1..len {
            let prev = &alpha[(t - 1) * l..t * l];
            let emit = p.row(t);
            for b in 0..l {
                q[b] = emit[b] + beta[t * l + b];
            }
            let ma = max_of(prev);
            let mb = max_of(&q);
            if ma == f64::NEG_INFINITY || mb == f64::NEG_INFINITY {
                continue;
            }
            let c = ma + mb + shift - log_z;
            if c <= 700.0 {
                let ec = c.exp();
                for a in 0..l {
                    wa[a] = (prev[a] - ma).exp() * ec;
                }
                for b in 0..l {
                    wb[b] = (q[b] - mb).exp();
                }
                for a in 0..l {
                    if wa[a] == 0.0 {
                        continue;
                    }
                    let row = &mut pairwise[a * l..(a + 1) * l];
                    for b in 0..l {
                        row[b] += wa[a] * exp_trans[a * l + b] * wb[b];
                    }
                }
            } else {
                for a in 0..l {
                    for b in 0..l {
                        let v = p.transitions[a * l + b];
                        if v.is_finite() {
                            pairwise[a * l + b] += (prev[a] + v + q[b] - log_z).exp();
                        }
                    }
                }
            }
        }
    }
    Ok(Posteriors {
        log_z,
        unary,
        pairwise,
    })
}
