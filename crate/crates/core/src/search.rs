//! Breadth-first enumeration of reduced words with value deduplication.

use std::collections::HashSet;
use std::hash::Hash;

use crate::germs::{Letter, Word};

pub(crate) enum Visit {
    Continue,
    Stop,
}

/// Walks words in order of length, then lexicographically by letter
/// position in `letters`. A word is expanded only if its value has not been
/// seen, so the frontier stays finite whenever the ball of radius `max_len`
/// in the group is. `visit` sees every new value exactly once, starting with
/// the empty word.
pub(crate) fn breadth_first<T, K, E, F, V>(
    letters: &[Letter],
    identity: T,
    max_len: usize,
    mut extend: E,
    key: F,
    mut visit: V,
) where
    K: Hash + Eq,
    E: FnMut(&T, usize) -> T,
    F: Fn(&T) -> K,
    V: FnMut(&Word, &T) -> Visit,
{
    let mut seen: HashSet<K> = HashSet::new();
    seen.insert(key(&identity));
    let root = Word::empty();
    if let Visit::Stop = visit(&root, &identity) {
        return;
    }
    let mut frontier = vec![(root, identity)];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (word, value) in &frontier {
            let last = word.letters.last().copied();
            for (li, &letter) in letters.iter().enumerate() {
                if last == Some(letter.inverse()) {
                    continue;
                }
                let child = extend(value, li);
                if !seen.insert(key(&child)) {
                    continue;
                }
                let mut w = word.clone();
                w.letters.push(letter);
                if let Visit::Stop = visit(&w, &child) {
                    return;
                }
                next.push((w, child));
            }
        }
        if next.is_empty() {
            return;
        }
        frontier = next;
    }
}
