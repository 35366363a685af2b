use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use skel_core::covering::enumerate_connected_double_covers;
use skel_core::gen::{length_choices, random_min3_multigraph};
use skel_core::loops::{enumerate_loops, loop_length, DEFAULT_LOOP_CAP};
use skel_core::reconstruct::{constraint_matrix, solve_lengths, verify_full_rank, CoverId};
use std::time::Instant;

fn main() {
    let mut rng = ChaCha20Rng::seed_from_u64(0xACC4);
    let choices = length_choices(&[1, 2, 3, 4], 8);
    for case in 0..12 {
        let v = rng.gen_range(2..=6usize);
        let lo = (3 * v).div_ceil(2);
        let hi = (v + 5).min(10);
        let e = rng.gen_range(lo..=hi);
        let g = random_min3_multigraph(&mut rng, v, e);
        let b1 = g.betti();
        let t0 = Instant::now();
        let rep = verify_full_rank(&g, 2, DEFAULT_LOOP_CAP).unwrap();
        let t_verify = t0.elapsed();
        let t0 = Instant::now();
        let covers = enumerate_connected_double_covers(&g).unwrap();
        let mut nloops = enumerate_loops(&g, DEFAULT_LOOP_CAP).unwrap().len();
        for dc in &covers {
            nloops += enumerate_loops(dc.total(), DEFAULT_LOOP_CAP).unwrap().len();
        }
        let t_enum = t0.elapsed();
        let hidden = skel_core::gen::random_lengths(&mut rng, &g, &choices);
        let t0 = Instant::now();
        let mut sys = constraint_matrix(&g, DEFAULT_LOOP_CAP).unwrap();
        for idx in 0..sys.rows.len() {
            let src = sys.sources[idx].clone();
            let rhs = match &src.cover {
                CoverId::Base => loop_length(&src.cycle, &hidden).unwrap(),
                CoverId::Double(k) => {
                    loop_length(&src.cycle, &covers[*k].lift_metric(&hidden).unwrap()).unwrap()
                }
                CoverId::Triple(_) => unreachable!(),
            };
            sys.rows[idx].rhs = Some(rhs);
        }
        let t_rhs = t0.elapsed();
        let t0 = Instant::now();
        let _ = solve_lengths(&sys).unwrap();
        let t_solve = t0.elapsed();

        let edges: Vec<_> = g.edge_ids().cloned().collect();
        let target = edges[rng.gen_range(0..edges.len())].clone();
        let (cut, _, _, _) = g.subdivide_edge(&target).unwrap();
        let t0 = Instant::now();
        let rep2 = verify_full_rank(&cut, 2, DEFAULT_LOOP_CAP).unwrap();
        let t_cut = t0.elapsed();
        println!(
            "case {case}: V={v} E={e} b1={b1} rows={} | verify {t_verify:?} (full={}) enum {t_enum:?} ({nloops} loops) rhs {t_rhs:?} solve {t_solve:?} | cut-verify {t_cut:?} (full={})",
            sys.rows.len(),
            rep.full_rank,
            rep2.full_rank
        );
    }
}
