//! Deterministic in-process SPMD runtime.
//!
//! [`run_spmd`] spawns `p` logical PEs as OS threads, each with its own
//! [`Pe`] context carrying a world [`Communicator`] and a seeded RNG stream.
//! The only channel between PEs is the communicator; collectives are full
//! synchronization points. Two runs with equal `(p, inputs, seed)` produce
//! identical results and identical [`CommStats`].

mod cell;
mod comm;
mod stats;

pub use comm::Communicator;
pub use stats::CommStats;

use std::cell::RefCell;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::rc::Rc;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::Result;

use cell::Liveness;
use comm::Group;

/// Per-rank execution context handed to SPMD programs.
pub struct Pe {
    world: Communicator,
    rng: ChaCha8Rng,
    seed: u64,
}

impl Pe {
    pub fn rank(&self) -> usize {
        self.world.rank()
    }

    pub fn size(&self) -> usize {
        self.world.size()
    }

    pub fn comm(&self) -> &Communicator {
        &self.world
    }

    /// Rank-local RNG stream derived from the run seed.
    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Run seed shared by all ranks, for keying counter-based streams.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Split borrow for code that draws randomness between collectives.
    pub fn comm_and_rng(&mut self) -> (&Communicator, &mut ChaCha8Rng) {
        (&self.world, &mut self.rng)
    }

    pub fn stats(&self) -> CommStats {
        self.world.stats()
    }
}

/// Runs `p` copies of `program` concurrently and returns each rank's result
/// in rank order. The first failing rank's error (by rank index) wins.
pub fn run_spmd<R, F>(p: usize, seed: u64, program: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(&mut Pe) -> Result<R> + Sync,
{
    assert!(p >= 1, "at least one PE required");
    let liveness = Arc::new(Liveness::new(p));
    let world = Arc::new(Group::new((0..p).collect()));

    let outcomes: Vec<Result<R>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..p)
            .map(|rank| {
                let liveness = liveness.clone();
                let world = world.clone();
                let program = &program;
                scope.spawn(move || {
                    let stats = Rc::new(RefCell::new(CommStats::default()));
                    let comm = Communicator::new(world, rank, liveness.clone(), stats);
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(rank as u64);
                    let mut pe = Pe {
                        world: comm,
                        rng,
                        seed,
                    };
                    let outcome = catch_unwind(AssertUnwindSafe(|| program(&mut pe)));
                    liveness.mark_exited(rank);
                    match outcome {
                        Ok(result) => result,
                        Err(payload) => Err(Error::PeFailure {
                            rank,
                            message: panic_message(payload),
                        }),
                    }
                })
            })
            .collect();
        handles
            .into_iter()
            .enumerate()
            .map(|(rank, h)| match h.join() {
                Ok(r) => r,
                Err(payload) => Err(Error::PeFailure {
                    rank,
                    message: panic_message(payload),
                }),
            })
            .collect()
    });

    // Rendezvous abandonment errors are collateral damage of some rank's
    // failure; report the root cause when one exists.
    if outcomes.iter().any(|o| o.is_err()) {
        let mut first_deadlock = None;
        for outcome in outcomes {
            match outcome {
                Err(e @ Error::DeadlockDetected(_)) => {
                    first_deadlock.get_or_insert(e);
                }
                Err(e) => return Err(e),
                Ok(_) => {}
            }
        }
        return Err(first_deadlock.expect("some rank failed"));
    }
    Ok(outcomes.into_iter().map(|o| o.expect("checked")).collect())
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "panic".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_rank_returns_rank() {
        let out = run_spmd(1, 0, |pe| Ok(pe.rank())).unwrap();
        assert_eq!(out, vec![0]);
    }

    #[test]
    fn allreduce_sum_counts_ranks() {
        let out = run_spmd(4, 0, |pe| pe.comm().allreduce_sum(1)).unwrap();
        assert_eq!(out, vec![4, 4, 4, 4]);
    }

    #[test]
    fn allreduce_identity_on_one_pe() {
        let out = run_spmd(1, 0, |pe| pe.comm().allreduce_vec(vec![3u64, 7], |a, b| a + b)).unwrap();
        assert_eq!(out[0], vec![3, 7]);
    }

    #[test]
    fn allreduce_vec_elementwise_sum() {
        let out = run_spmd(4, 0, |pe| {
            pe.comm().allreduce_vec(vec![1u64, 0, 2], |a, b| a + b)
        })
        .unwrap();
        assert!(out.iter().all(|v| v == &vec![4, 0, 8]));
    }

    #[test]
    fn allreduce_length_mismatch_is_reported() {
        let err = run_spmd(2, 0, |pe| {
            let v = if pe.rank() == 0 { vec![1u64] } else { vec![1u64, 2] };
            pe.comm().allreduce_vec(v, |a, b| a + b)
        })
        .unwrap_err();
        assert!(matches!(err, Error::LengthMismatch(..)));
    }

    #[test]
    fn alltoallv_swaps_records() {
        let out = run_spmd(2, 0, |pe| {
            let batches = if pe.rank() == 0 {
                vec![vec![], vec![b'a']]
            } else {
                vec![vec![b'b'], vec![]]
            };
            pe.comm().alltoallv(batches)
        })
        .unwrap();
        assert_eq!(out[0], vec![vec![], vec![b'b']]);
        assert_eq!(out[1], vec![vec![b'a'], vec![]]);
    }

    #[test]
    fn alltoallv_empty_batches() {
        let out = run_spmd(3, 0, |pe| {
            pe.comm().alltoallv::<u64>(vec![vec![], vec![], vec![]])
        })
        .unwrap();
        assert!(out.iter().all(|r| r.iter().all(|b| b.is_empty())));
    }

    #[test]
    fn alltoallv_conserves_records() {
        use rand::Rng;
        let p = 5;
        let out = run_spmd(p, 9, |pe| {
            let mut sent: Vec<(usize, u64)> = Vec::new();
            let mut batches: Vec<Vec<u64>> = vec![Vec::new(); pe.size()];
            let rank = pe.rank();
            for _ in 0..40 {
                let dest = pe.rng().gen_range(0..p);
                let value = pe.rng().gen::<u64>();
                batches[dest].push(value);
                sent.push((dest, value));
            }
            let received = pe.comm().alltoallv(batches)?;
            let mut got: Vec<(usize, usize, u64)> = Vec::new();
            for (sender, records) in received.iter().enumerate() {
                for &v in records {
                    got.push((sender, rank, v));
                }
            }
            Ok((sent, got))
        })
        .unwrap();
        let mut sent_all: Vec<(usize, usize, u64)> = Vec::new();
        let mut recv_all: Vec<(usize, usize, u64)> = Vec::new();
        for (rank, (sent, got)) in out.into_iter().enumerate() {
            sent_all.extend(sent.into_iter().map(|(dest, v)| (rank, dest, v)));
            recv_all.extend(got.into_iter().map(|(sender, me, v)| (sender, me, v)));
        }
        sent_all.sort_unstable();
        recv_all.sort_unstable();
        assert_eq!(sent_all, recv_all);
    }

    #[test]
    fn broadcast_reaches_everyone() {
        let out = run_spmd(4, 0, |pe| {
            let v = if pe.rank() == 2 { Some(7u64) } else { None };
            pe.comm().broadcast(v, 2)
        })
        .unwrap();
        assert_eq!(out, vec![7, 7, 7, 7]);
    }

    #[test]
    fn prefix_sum_is_exclusive() {
        let out = run_spmd(4, 0, |pe| pe.comm().exclusive_prefix_sum(1)).unwrap();
        assert_eq!(out, vec![(0, 4), (1, 4), (2, 4), (3, 4)]);
    }

    #[test]
    fn allgatherv_keeps_rank_order_and_skips_empty() {
        let out = run_spmd(3, 0, |pe| {
            let local = if pe.rank() == 1 {
                vec![]
            } else {
                vec![pe.rank() as u64]
            };
            pe.comm().allgatherv(local)
        })
        .unwrap();
        assert!(out.iter().all(|v| v == &vec![0, 2]));
    }

    #[test]
    fn collective_mismatch_is_detected() {
        let err = run_spmd(2, 0, |pe| {
            if pe.rank() == 0 {
                pe.comm().barrier()?;
            } else {
                pe.comm().allreduce_sum(1)?;
            }
            Ok(())
        })
        .unwrap_err();
        assert!(matches!(err, Error::DeadlockDetected(_)));
    }

    #[test]
    fn missing_rank_is_detected() {
        let err = run_spmd(3, 0, |pe| {
            if pe.rank() == 2 {
                return Ok(0);
            }
            pe.comm().allreduce_sum(1)
        })
        .unwrap_err();
        assert!(matches!(err, Error::DeadlockDetected(_)));
    }

    #[test]
    fn panic_becomes_pe_failure() {
        let err = run_spmd(2, 0, |pe| {
            if pe.rank() == 1 {
                panic!("boom");
            }
            pe.comm().barrier()?;
            Ok(())
        })
        .unwrap_err();
        match err {
            Error::PeFailure { rank, message } => {
                assert_eq!(rank, 1);
                assert!(message.contains("boom"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn split_groups_by_color() {
        let out = run_spmd(6, 0, |pe| {
            let sub = pe.comm().split(pe.rank() % 2, pe.rank())?;
            let sum = sub.allreduce_sum(pe.rank() as u64)?;
            Ok((sub.size(), sub.rank(), sum))
        })
        .unwrap();
        // colors: even ranks {0,2,4} sum 6, odd ranks {1,3,5} sum 9
        assert_eq!(out[0], (3, 0, 6));
        assert_eq!(out[1], (3, 0, 9));
        assert_eq!(out[4], (3, 2, 6));
        assert_eq!(out[5], (3, 2, 9));
    }

    #[test]
    fn runs_are_deterministic() {
        use rand::Rng;
        let run = || {
            run_spmd(4, 123, |pe| {
                let x: u64 = pe.rng().gen();
                let all = pe.comm().allgather(x)?;
                let (pref, _) = pe.comm().exclusive_prefix_sum(x % 97)?;
                Ok((all, pref, pe.stats()))
            })
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a, b);
    }
}
