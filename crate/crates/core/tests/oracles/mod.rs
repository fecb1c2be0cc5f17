//! Independent reference implementations and randomized property checks.
//!
//! Every check returns `Err(description)` on the first violation so the same
//! code can drive both `#[test]` functions and the acceptance report.

#![allow(dead_code)]

use std::collections::BTreeSet;

use kge_core::ensemble::{AswaAction, AswaState, SwaState};
use kge_core::eval::{evaluate_split_detailed, Direction};
use kge_core::kg::{FilterIndex, KvsAllIndex, PairIndex, Triple};
use kge_core::matrix::Matrix;
use kge_core::models::{kvsall_loss_and_grad, score_triple, EmbeddingState, ModelKind, TailScorer};
use kge_core::queries::{answer_query, BeamConfig, Query, QueryType, TNorm};
use kge_core::Embeddings;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_state(
    rng: &mut ChaCha8Rng,
    kind: ModelKind,
    ne: usize,
    nr: usize,
    d: usize,
) -> Embeddings {
    let mut draw = |rows: usize| {
        let data = (0..rows * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Matrix::from_vec(rows, d, data)
    };
    let entity = draw(ne);
    let relation = draw(nr);
    EmbeddingState::new(kind, entity, relation).unwrap()
}

pub fn random_triples(rng: &mut ChaCha8Rng, ne: usize, nr: usize, n: usize) -> Vec<Triple> {
    let set: BTreeSet<Triple> = (0..n)
        .map(|_| {
            Triple::new(
                rng.gen_range(0..ne),
                rng.gen_range(0..nr),
                rng.gen_range(0..ne),
            )
        })
        .collect();
    set.into_iter().collect()
}

fn rel_close(a: f64, b: f64, tol: f64, floor: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(floor)
}

// ---------------------------------------------------------------- gradients

/// BCE loss written out triple by triple from `score_triple`.
pub fn naive_kvsall_loss(
    s: &Embeddings,
    batch: &[(usize, usize)],
    labels: &KvsAllIndex,
    smoothing: f64,
) -> f64 {
    let n = s.num_entities() as f64;
    let mut total = 0.0;
    for &(h, r) in batch {
        let tails = labels.tails(h, r);
        for t in 0..s.num_entities() {
            let y0 = if tails.contains(&t) { 1.0 } else { 0.0 };
            let y = y0 * (1.0 - smoothing) + smoothing / n;
            let z = score_triple(s, h, r, t).unwrap();
            let p = 1.0 / (1.0 + (-z).exp());
            total -= y * p.ln() + (1.0 - y) * (1.0 - p).ln();
        }
    }
    total / (batch.len() as f64 * n)
}

/// Central finite differences (step 1e-5) against the analytic gradient of
/// every parameter on a random small instance.
pub fn gradient_check(kind: ModelKind, seed: u64) -> Check {
    let mut rng = rng(seed);
    let ne = rng.gen_range(2..=6);
    let nr = rng.gen_range(1..=4);
    let d = kind.components() * rng.gen_range(1..=3);
    let s = random_state(&mut rng, kind, ne, nr, d);
    let n = rng.gen_range(1..=12);
    let triples = random_triples(&mut rng, ne, nr, n);
    let labels = KvsAllIndex(PairIndex::from_triples(triples));
    let keys: Vec<(usize, usize)> = labels.keys().collect();
    let take = rng.gen_range(1..=keys.len());
    let mut batch: Vec<(usize, usize)> = keys[..take].to_vec();
    if rng.gen_bool(0.3) {
        // repeated keys accumulate
        batch.push(batch[0]);
    }
    let smoothing = if rng.gen_bool(0.5) {
        0.0
    } else {
        rng.gen_range(0.0..0.3)
    };

    let g = kvsall_loss_and_grad(&s, &batch, &labels, smoothing).map_err(|e| e.to_string())?;
    let naive = naive_kvsall_loss(&s, &batch, &labels, smoothing);
    if !rel_close(g.loss, naive, 1e-10, 1e-12) {
        return Err(format!(
            "{kind} seed {seed}: loss {} vs naive {naive}",
            g.loss
        ));
    }

    let h = 1e-5;
    let analytic = |rows: &kge_core::models::SparseRows<f64>, i: usize, k: usize| {
        rows.get(i).map_or(0.0, |row| row[k])
    };
    for (is_entity, rows) in [(true, s.num_entities()), (false, s.num_relations())] {
        for i in 0..rows {
            for k in 0..d {
                let mut plus = s.clone();
                let mut minus = s.clone();
                let (p, m) = if is_entity {
                    (
                        &mut plus.entity.row_mut(i)[k],
                        &mut minus.entity.row_mut(i)[k],
                    )
                } else {
                    (
                        &mut plus.relation.row_mut(i)[k],
                        &mut minus.relation.row_mut(i)[k],
                    )
                };
                *p += h;
                *m -= h;
                let numeric = (naive_kvsall_loss(&plus, &batch, &labels, smoothing)
                    - naive_kvsall_loss(&minus, &batch, &labels, smoothing))
                    / (2.0 * h);
                let a = if is_entity {
                    analytic(&g.entity, i, k)
                } else {
                    analytic(&g.relation, i, k)
                };
                if !rel_close(a, numeric, 1e-4, 1e-6) {
                    let what = if is_entity { "entity" } else { "relation" };
                    return Err(format!(
                        "{kind} seed {seed}: d/d{what}[{i}][{k}] analytic {a} vs numeric {numeric}"
                    ));
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- ensembles

/// Absorbs `k ≤ 50` random snapshots and compares with their explicit mean.
pub fn swa_mean_check(seed: u64) -> Check {
    let mut rng = rng(seed);
    let k = rng.gen_range(1..=50);
    let (ne, nr, d) = (
        rng.gen_range(1..6),
        rng.gen_range(1..4),
        2 * rng.gen_range(1..4),
    );
    let snaps: Vec<Embeddings> = (0..k)
        .map(|_| random_state(&mut rng, ModelKind::ComplEx, ne, nr, d))
        .collect();
    let mut swa = SwaState::new(&snaps[0], 1);
    for s in &snaps {
        swa.absorb(s).map_err(|e| e.to_string())?;
    }
    if swa.n_models != k {
        return Err(format!(
            "seed {seed}: n_models {} after {k} absorbs",
            swa.n_models
        ));
    }
    compare_to_mean(&swa.theta, &snaps, 1e-9).map_err(|e| format!("seed {seed}: {e}"))
}

fn compare_to_mean(theta: &Embeddings, snaps: &[Embeddings], tol: f64) -> Check {
    let k = snaps.len() as f64;
    let pairs = [
        (
            theta.entity.as_slice(),
            snaps
                .iter()
                .map(|s| s.entity.as_slice())
                .collect::<Vec<_>>(),
        ),
        (
            theta.relation.as_slice(),
            snaps
                .iter()
                .map(|s| s.relation.as_slice())
                .collect::<Vec<_>>(),
        ),
    ];
    for (got, members) in pairs {
        for (i, &g) in got.iter().enumerate() {
            let mean = members.iter().map(|m| m[i]).sum::<f64>() / k;
            if !rel_close(g, mean, tol, 1.0) {
                return Err(format!("coordinate {i}: {g} vs mean {mean}"));
            }
        }
    }
    Ok(())
}

/// Scripted validation scores for one epoch: the running model's score and
/// the look-ahead score, on a coarse grid so ties occur.
fn scripted(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let grid = |rng: &mut ChaCha8Rng| (rng.gen_range(0..=20) as f64) * 0.05;
    (grid(rng), grid(rng))
}

/// Runs a random epoch sequence through `AswaState::epoch_step` and checks
/// every structural property of the update rule.
pub fn aswa_sequence_check(seed: u64) -> Check {
    let mut rng = rng(seed);
    let epochs = rng.gen_range(1..=30);
    let (ne, nr, d) = (rng.gen_range(1..5), rng.gen_range(1..4), 2);
    let init = random_state(&mut rng, ModelKind::DistMult, ne, nr, d);
    let mut aswa = AswaState::new(&init);
    let mut best_seen = f64::NEG_INFINITY;
    let mut prev_val = aswa.val_aswa;

    for epoch in 1..=epochs {
        let next = random_state(&mut rng, ModelKind::DistMult, ne, nr, d);
        let (v_run, v_look) = scripted(&mut rng);
        let before = aswa.clone();
        let mut calls = 0;
        let action = aswa
            .epoch_step(epoch, &next, |_| {
                calls += 1;
                Ok(if calls == 1 { v_run } else { v_look })
            })
            .map_err(|e| e.to_string())?;
        best_seen = best_seen.max(v_run);
        let ctx = |msg: &str| format!("seed {seed} epoch {epoch}: {msg}");

        let expected = if v_run > before.val_aswa {
            AswaAction::Hard
        } else if v_look > before.val_aswa {
            AswaAction::Soft
        } else {
            AswaAction::Reject
        };
        if action != expected {
            return Err(ctx(&format!("action {action}, expected {expected}")));
        }
        if aswa.val_aswa < prev_val {
            return Err(ctx("val_aswa decreased"));
        }
        if aswa.val_aswa < best_seen {
            return Err(ctx(&format!(
                "val_aswa {} below observed {best_seen}",
                aswa.val_aswa
            )));
        }
        match action {
            AswaAction::Hard => {
                if aswa.alpha_count != 1 || aswa.theta != next || aswa.val_aswa != v_run {
                    return Err(ctx(
                        "hard update did not adopt the running model as sole member",
                    ));
                }
            }
            AswaAction::Soft => {
                let a = before.alpha_count as f64;
                let oracle = |x: &Matrix<f64>, y: &Matrix<f64>| -> Vec<f64> {
                    x.as_slice()
                        .iter()
                        .zip(y.as_slice())
                        .map(|(p, q)| (p * a + q) / (a + 1.0))
                        .collect()
                };
                let ok = aswa.alpha_count == before.alpha_count + 1
                    && aswa.val_aswa == v_look
                    && aswa
                        .theta
                        .entity
                        .as_slice()
                        .iter()
                        .zip(oracle(&before.theta.entity, &next.entity))
                        .chain(
                            aswa.theta
                                .relation
                                .as_slice()
                                .iter()
                                .zip(oracle(&before.theta.relation, &next.relation)),
                        )
                        .all(|(g, o)| rel_close(*g, o, 1e-12, 1.0));
                if !ok {
                    return Err(ctx("soft update is not the weighted look-ahead"));
                }
            }
            AswaAction::Reject => {
                if aswa.theta != before.theta
                    || aswa.alpha_count != before.alpha_count
                    || aswa.val_aswa != before.val_aswa
                {
                    return Err(ctx("reject changed the state"));
                }
            }
        }
        if aswa.theta != before.theta && aswa.val_aswa <= before.val_aswa {
            return Err(ctx("parameters changed without a strict score increase"));
        }
        prev_val = aswa.val_aswa;
    }
    Ok(())
}

/// Hard-adopts the first snapshot, then soft-accepts every later one with
/// strictly increasing scores; the ensemble must be the plain mean.
pub fn aswa_all_soft_check(seed: u64) -> Check {
    let mut rng = rng(seed);
    let k = rng.gen_range(1..=30);
    let (ne, nr, d) = (rng.gen_range(1..5), rng.gen_range(1..4), 4);
    let init = random_state(&mut rng, ModelKind::QMult, ne, nr, d);
    let snaps: Vec<Embeddings> = (0..k)
        .map(|_| random_state(&mut rng, ModelKind::QMult, ne, nr, d))
        .collect();
    let mut aswa = AswaState::new(&init);
    for (i, s) in snaps.iter().enumerate() {
        let base = 0.1 + 0.01 * i as f64;
        let mut calls = 0;
        let action = aswa
            .epoch_step(i + 1, s, |_| {
                calls += 1;
                // running score never beats the ensemble after epoch 1;
                // the look-ahead always does
                Ok(if i == 0 {
                    base
                } else if calls == 1 {
                    0.0
                } else {
                    base
                })
            })
            .map_err(|e| e.to_string())?;
        let want = if i == 0 {
            AswaAction::Hard
        } else {
            AswaAction::Soft
        };
        if action != want {
            return Err(format!(
                "seed {seed} epoch {}: {action}, expected {want}",
                i + 1
            ));
        }
    }
    if aswa.alpha_count != k {
        return Err(format!(
            "seed {seed}: alpha_count {} after {k} members",
            aswa.alpha_count
        ));
    }
    compare_to_mean(&aswa.theta, &snaps, 1e-9).map_err(|e| format!("seed {seed}: {e}"))
}

// ---------------------------------------------------------------- ranking

/// Rank of `gold` among all entities by direct triple scoring, skipping the
/// other known tails; ties count half, floored.
pub fn naive_rank(
    s: &Embeddings,
    h: usize,
    r: usize,
    gold: usize,
    known: &BTreeSet<usize>,
) -> usize {
    let g = score_triple(s, h, r, gold).unwrap();
    let (mut better, mut equal) = (0, 0);
    for e in 0..s.num_entities() {
        if e == gold || known.contains(&e) {
            continue;
        }
        let v = score_triple(s, h, r, e).unwrap();
        if v > g {
            better += 1;
        } else if v == g {
            equal += 1;
        }
    }
    1 + better + equal / 2
}

/// A random toy KG (|E| ≤ 20) with a random model, some of whose scores are
/// forced to tie; `evaluate_split_detailed` must reproduce the naive ranks.
pub fn ranking_check(seed: u64) -> Check {
    let mut rng = rng(seed);
    let ne = rng.gen_range(2..=20);
    let nr = rng.gen_range(1..=4);
    let kind = [ModelKind::DistMult, ModelKind::ComplEx, ModelKind::QMult][rng.gen_range(0..3)];
    let d = kind.components() * rng.gen_range(1..=2);
    let mut s = random_state(&mut rng, kind, ne, 2 * nr, d);
    // duplicate entity rows create exact score ties
    for _ in 0..rng.gen_range(0..=ne / 2) {
        let (a, b) = (rng.gen_range(0..ne), rng.gen_range(0..ne));
        let row = s.entity.row(a).to_vec();
        s.entity.row_mut(b).copy_from_slice(&row);
    }
    if rng.gen_bool(0.2) {
        s.entity.fill(0.0);
    }
    let n = rng.gen_range(1..=40);
    let all = random_triples(&mut rng, ne, nr, n);
    let test: Vec<Triple> = all.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();

    let mut known = std::collections::BTreeMap::<(usize, usize), BTreeSet<usize>>::new();
    for t in &all {
        known.entry((t.h, t.r)).or_default().insert(t.t);
        known.entry((t.t, t.r + nr)).or_default().insert(t.h);
    }
    let filter = FilterIndex(PairIndex::from_triples(
        all.iter().flat_map(|&t| [t, t.reciprocal(nr)]),
    ));
    let got = evaluate_split_detailed(&s, &test, &filter).map_err(|e| e.to_string())?;
    if got.len() != 2 * test.len() {
        return Err(format!(
            "seed {seed}: {} ranks for {} triples",
            got.len(),
            test.len()
        ));
    }
    for q in &got {
        let t = q.triple;
        let (h, r, gold) = match q.direction {
            Direction::Tail => (t.h, t.r, t.t),
            Direction::Head => (t.t, t.r + nr, t.h),
        };
        let mut others = known[&(h, r)].clone();
        others.remove(&gold);
        let want = naive_rank(&s, h, r, gold, &others);
        if q.rank != want {
            return Err(format!(
                "seed {seed}: {t:?} {:?} rank {} vs naive {want}",
                q.direction, q.rank
            ));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- queries

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Truth value of one atom straight from the triple scorer.
fn atom<S: TailScorer<f64>>(s: &S, h: usize, r: usize, t: usize) -> f64 {
    let row = s.score_tails(h, r).unwrap();
    sigmoid(row.logits[t])
}

/// Score of every answer by enumerating every assignment of the query's
/// existential variables.
pub fn exhaustive_scores<S: TailScorer<f64>>(q: &Query, s: &S, tnorm: TNorm) -> Vec<f64> {
    let n = s.num_entities();
    let (a, r) = (&q.anchors, &q.relations);
    let and = |x: f64, y: f64| tnorm.and(x, y);
    let or = |x: f64, y: f64| tnorm.or(x, y);
    let at = |h: usize, rel: usize, t: usize| atom(s, h, rel, t);
    (0..n)
        .map(|x| match q.qtype {
            QueryType::TwoPath => (0..n)
                .map(|v| and(at(a[0], r[0], v), at(v, r[1], x)))
                .fold(0.0, f64::max),
            QueryType::ThreePath => (0..n)
                .flat_map(|v1| (0..n).map(move |v2| (v1, v2)))
                .map(|(v1, v2)| and(and(at(a[0], r[0], v1), at(v1, r[1], v2)), at(v2, r[2], x)))
                .fold(0.0, f64::max),
            QueryType::TwoIntersect => and(at(a[0], r[0], x), at(a[1], r[1], x)),
            QueryType::ThreeIntersect => {
                and(and(at(a[0], r[0], x), at(a[1], r[1], x)), at(a[2], r[2], x))
            }
            QueryType::IntersectPath => (0..n)
                .map(|v| and(and(at(a[0], r[0], v), at(a[1], r[1], v)), at(v, r[2], x)))
                .fold(0.0, f64::max),
            QueryType::PathIntersect => {
                let path = (0..n)
                    .map(|v| and(at(a[0], r[0], v), at(v, r[1], x)))
                    .fold(0.0, f64::max);
                and(path, at(a[1], r[2], x))
            }
            QueryType::TwoUnion => or(at(a[0], r[0], x), at(a[1], r[1], x)),
            QueryType::UnionPath => (0..n)
                .map(|v| and(or(at(a[0], r[0], v), at(a[1], r[1], v)), at(v, r[2], x)))
                .fold(0.0, f64::max),
        })
        .collect()
}

/// Entities ranked by score, descending, ties by id.
pub fn ranked(scores: &[f64]) -> Vec<(usize, f64)> {
    let mut v: Vec<(usize, f64)> = scores.iter().copied().enumerate().collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    v
}

pub fn random_query(rng: &mut ChaCha8Rng, qtype: QueryType, ne: usize, nr: usize) -> Query {
    let (na, nrel) = qtype.arity();
    Query {
        qtype,
        anchors: (0..na).map(|_| rng.gen_range(0..ne)).collect(),
        relations: (0..nrel).map(|_| rng.gen_range(0..nr)).collect(),
        answers: vec![rng.gen_range(0..ne)],
    }
}

/// With the beam as wide as the entity set, beam search must return exactly
/// the exhaustive ranking for every query type and both t-norms.
pub fn beam_completeness_check(seed: u64) -> Check {
    let mut rng = rng(seed);
    let ne = rng.gen_range(2..=20);
    let nr = rng.gen_range(1..=4);
    let kind = [ModelKind::DistMult, ModelKind::ComplEx, ModelKind::QMult][rng.gen_range(0..3)];
    let d = kind.components() * rng.gen_range(1..=3);
    let mut s = random_state(&mut rng, kind, ne, 2 * nr, d);
    // sharpen the scores so truth values spread over (0, 1)
    s.entity.as_mut_slice().iter_mut().for_each(|x| *x *= 2.0);
    for qtype in QueryType::ALL {
        for tnorm in [TNorm::Product, TNorm::Goedel] {
            let q = random_query(&mut rng, qtype, ne, 2 * nr);
            let cfg = BeamConfig {
                beam_width: ne,
                tnorm,
            };
            let got = answer_query(&q, &s, &cfg).map_err(|e| e.to_string())?;
            let want = ranked(&exhaustive_scores(&q, &s, tnorm));
            if got != want {
                return Err(format!(
                    "seed {seed} {qtype} {tnorm:?}: beam {:?}... vs exhaustive {:?}...",
                    &got[..got.len().min(3)],
                    &want[..want.len().min(3)]
                ));
            }
        }
    }
    Ok(())
}
