//! Rendezvous cell: the single synchronization primitive behind every
//! collective. All members of a communicator deposit a payload, the last
//! arriver combines the deposits into per-member results, and everyone
//! picks up its share. Program-order matching is enforced: members entering
//! different collectives on the same communicator poison the cell.

use std::any::Any;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use crate::error::Error;

type Payload = Box<dyn Any + Send>;

/// Flags shared by all cells of one `run_spmd` invocation; used to detect
/// peers that left the program while others still wait in a collective.
pub(crate) struct Liveness {
    exited: Vec<AtomicBool>,
}

impl Liveness {
    pub fn new(p: usize) -> Self {
        Liveness {
            exited: (0..p).map(|_| AtomicBool::new(false)).collect(),
        }
    }

    pub fn mark_exited(&self, world_rank: usize) {
        self.exited[world_rank].store(true, Ordering::SeqCst);
    }

    fn has_exited(&self, world_rank: usize) -> bool {
        self.exited[world_rank].load(Ordering::SeqCst)
    }
}

struct CellState {
    kind: Option<&'static str>,
    arrived: usize,
    departed: usize,
    deposits: Vec<Option<Payload>>,
    results: Vec<Option<Payload>>,
    combined: bool,
    poisoned: Option<String>,
}

pub(crate) struct Cell {
    size: usize,
    /// World ranks of the members, indexed by group rank.
    members: Vec<usize>,
    state: Mutex<CellState>,
    cv: Condvar,
}

const PROBE: Duration = Duration::from_millis(10);

impl Cell {
    pub fn new(members: Vec<usize>) -> Self {
        let size = members.len();
        Cell {
            size,
            members,
            state: Mutex::new(CellState {
                kind: None,
                arrived: 0,
                departed: 0,
                deposits: (0..size).map(|_| None).collect(),
                results: (0..size).map(|_| None).collect(),
                combined: false,
                poisoned: None,
            }),
            cv: Condvar::new(),
        }
    }

    /// Runs one collective step for `rank` (a group rank). `combine` is
    /// executed exactly once, by the last member to arrive, and must be a
    /// pure function of the deposits so that results do not depend on which
    /// member ran it.
    pub fn exchange<T, R, F>(
        &self,
        rank: usize,
        kind: &'static str,
        input: T,
        combine: F,
        liveness: &Liveness,
    ) -> Result<R, Error>
    where
        T: Send + 'static,
        R: Send + 'static,
        F: FnOnce(Vec<T>) -> Vec<R>,
    {
        let mut st = self.state.lock().unwrap();

        // A fast member may re-enter for the next collective while peers are
        // still picking up the previous one; hold it until the cell resets.
        while st.arrived == self.size {
            if let Some(msg) = &st.poisoned {
                return Err(Error::DeadlockDetected(msg.clone()));
            }
            let (next, _) = self.cv.wait_timeout(st, PROBE).unwrap();
            st = next;
        }
        if let Some(msg) = &st.poisoned {
            return Err(Error::DeadlockDetected(msg.clone()));
        }

        match st.kind {
            None => st.kind = Some(kind),
            Some(k) if k != kind => {
                let msg = format!("rank entered `{kind}` while peers entered `{k}`");
                st.poisoned = Some(msg.clone());
                self.cv.notify_all();
                return Err(Error::DeadlockDetected(msg));
            }
            _ => {}
        }

        st.deposits[rank] = Some(Box::new(input));
        st.arrived += 1;

        if st.arrived == self.size {
            // Last arriver combines.
            let mut inputs = Vec::with_capacity(self.size);
            for slot in st.deposits.iter_mut() {
                let boxed = slot.take().expect("deposit missing");
                match boxed.downcast::<T>() {
                    Ok(v) => inputs.push(*v),
                    Err(_) => {
                        let msg = format!("payload type mismatch in `{kind}`");
                        st.poisoned = Some(msg.clone());
                        self.cv.notify_all();
                        return Err(Error::DeadlockDetected(msg));
                    }
                }
            }
            let outputs = combine(inputs);
            debug_assert_eq!(outputs.len(), self.size);
            for (slot, out) in st.results.iter_mut().zip(outputs) {
                *slot = Some(Box::new(out));
            }
            st.combined = true;
            self.cv.notify_all();
        } else {
            while !st.combined {
                if let Some(msg) = &st.poisoned {
                    return Err(Error::DeadlockDetected(msg.clone()));
                }
                if let Some(gone) = self.abandoned(&st, liveness) {
                    let msg = format!("rank {gone} exited while peers wait in `{kind}`");
                    st.poisoned = Some(msg.clone());
                    self.cv.notify_all();
                    return Err(Error::DeadlockDetected(msg));
                }
                let (next, _) = self.cv.wait_timeout(st, PROBE).unwrap();
                st = next;
            }
            if let Some(msg) = &st.poisoned {
                return Err(Error::DeadlockDetected(msg.clone()));
            }
        }

        let boxed = st.results[rank].take().expect("result missing");
        let result = *boxed.downcast::<R>().expect("result type mismatch");

        st.departed += 1;
        if st.departed == self.size {
            st.kind = None;
            st.arrived = 0;
            st.departed = 0;
            st.combined = false;
        }
        self.cv.notify_all();
        Ok(result)
    }

    /// A member that already left the program but has not deposited for the
    /// current epoch will never arrive.
    fn abandoned(&self, st: &CellState, liveness: &Liveness) -> Option<usize> {
        for (group_rank, &world_rank) in self.members.iter().enumerate() {
            if st.deposits[group_rank].is_none() && liveness.has_exited(world_rank) {
                return Some(world_rank);
            }
        }
        None
    }
}
