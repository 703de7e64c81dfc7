//! Order-preserving parallel map on scoped threads.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Applies `f` to every item on up to `workers` threads, keeping input order.
pub fn map_ordered<I, O, F>(items: &[I], workers: usize, f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync,
{
    let workers = workers.max(1).min(items.len());
    if workers <= 1 {
        return items.iter().map(f).collect();
    }
    let slots: Mutex<Vec<Option<O>>> = Mutex::new(items.iter().map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else {
                    break;
                };
                let out = f(item);
                slots.lock().expect("slots poisoned")[i] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("slots poisoned")
        .into_iter()
        .map(|o| o.expect("every slot filled"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordered_map_matches_sequential() {
        let items: Vec<u64> = (0..257).collect();
        let seq = map_ordered(&items, 1, |x| x * x);
        assert_eq!(map_ordered(&items, 8, |x| x * x), seq);
        assert!(map_ordered(&Vec::<u64>::new(), 4, |x| *x).is_empty());
    }
}
