//! Alphabet-to-slice assignment.
//!
//! The 28 items (`A`..`Z`, `SPACE`, `CLEAR`) are laid out contiguously and
//! alphabetically, clockwise from slice 0, with the two special keys at the
//! end of the last slice.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Total number of selectable items.
pub const ITEM_COUNT: usize = 28;
/// Smallest supported slice count.
pub const MIN_SLICES: usize = 2;
/// Largest supported slice count (keeps at least two items per slice).
pub const MAX_SLICES: usize = ITEM_COUNT / 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("slice count {0} out of range {MIN_SLICES}..={MAX_SLICES}")]
    SliceCount(usize),
    #[error("no item for {0:?} in layout")]
    Unknown(char),
}

/// What committing an item does to the transcript.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "char", rename_all = "snake_case")]
pub enum Action {
    AppendChar(char),
    AppendSpace,
    ClearLast,
}

impl Action {
    /// Applies the action to a transcript buffer.
    pub fn apply(self, buffer: &mut String) {
        match self {
            Action::AppendChar(c) => buffer.push(c),
            Action::AppendSpace => buffer.push(' '),
            Action::ClearLast => {
                buffer.pop();
            }
        }
    }

    /// True for actions that produce a character.
    pub fn is_typing(self) -> bool {
        !matches!(self, Action::ClearLast)
    }

    /// The action that types `c`, if any. Letters are case-folded.
    pub fn for_char(c: char) -> Option<Action> {
        match c {
            ' ' => Some(Action::AppendSpace),
            c if c.is_ascii_alphabetic() => Some(Action::AppendChar(c.to_ascii_lowercase())),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub label: String,
    pub action: Action,
    /// Position within the slice, clockwise. Drives the darkness gradient.
    pub shade_rank: usize,
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// The 28 items in layout order.
fn alphabet() -> impl Iterator<Item = (String, Action)> {
    ('a'..='z')
        .map(|c| (c.to_ascii_uppercase().to_string(), Action::AppendChar(c)))
        .chain([
            ("SPACE".to_string(), Action::AppendSpace),
            ("CLEAR".to_string(), Action::ClearLast),
        ])
}

/// Number of items in each slice.
///
/// Every slice but the last takes `ceil(28 / n)` items and the last takes
/// the remainder. When that remainder would drop below two items the split
/// falls back to a balanced one with the larger slices first.
pub fn slice_sizes(num_slices: usize) -> Result<Vec<usize>, LayoutError> {
    if !(MIN_SLICES..=MAX_SLICES).contains(&num_slices) {
        return Err(LayoutError::SliceCount(num_slices));
    }
    let per = ITEM_COUNT.div_ceil(num_slices);
    let filled = per * (num_slices - 1);
    if filled + 2 <= ITEM_COUNT {
        let mut sizes = vec![per; num_slices - 1];
        sizes.push(ITEM_COUNT - filled);
        return Ok(sizes);
    }
    let base = ITEM_COUNT / num_slices;
    let extra = ITEM_COUNT % num_slices;
    Ok((0..num_slices)
        .map(|i| if i < extra { base + 1 } else { base })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    slices: Vec<Vec<Item>>,
}

impl Layout {
    pub fn build(num_slices: usize) -> Result<Self, LayoutError> {
        let sizes = slice_sizes(num_slices)?;
        let mut items = alphabet();
        let slices = sizes
            .into_iter()
            .map(|n| {
                items
                    .by_ref()
                    .take(n)
                    .enumerate()
                    .map(|(shade_rank, (label, action))| Item {
                        label,
                        action,
                        shade_rank,
                    })
                    .collect()
            })
            .collect();
        Ok(Layout { slices })
    }

    pub fn num_slices(&self) -> usize {
        self.slices.len()
    }

    pub fn slices(&self) -> &[Vec<Item>] {
        &self.slices
    }

    pub fn slice(&self, index: usize) -> Option<&[Item]> {
        self.slices.get(index).map(Vec::as_slice)
    }

    pub fn n_items(&self, slice: usize) -> usize {
        self.slices.get(slice).map_or(0, Vec::len)
    }

    pub fn item(&self, slice: usize, item: usize) -> Option<&Item> {
        self.slices.get(slice)?.get(item)
    }

    pub fn items(&self) -> impl Iterator<Item = (usize, usize, &Item)> {
        self.slices
            .iter()
            .enumerate()
            .flat_map(|(s, items)| items.iter().enumerate().map(move |(i, it)| (s, i, it)))
    }

    /// Position `(slice, item)` of the item performing `action`.
    pub fn locate(&self, action: Action) -> Option<(usize, usize)> {
        self.items()
            .find(|(_, _, it)| it.action == action)
            .map(|(s, i, _)| (s, i))
    }

    /// Position of the item that types `c` (letters are case-insensitive).
    pub fn locate_char(&self, c: char) -> Result<(usize, usize), LayoutError> {
        Action::for_char(c)
            .and_then(|a| self.locate(a))
            .ok_or(LayoutError::Unknown(c))
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, items) in self.slices.iter().enumerate() {
            let labels: Vec<&str> = items.iter().map(|it| it.label.as_str()).collect();
            writeln!(f, "slice {s}: {}", labels.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(layout: &Layout) -> Vec<Vec<&str>> {
        layout
            .slices()
            .iter()
            .map(|s| s.iter().map(|it| it.label.as_str()).collect())
            .collect()
    }

    #[test]
    fn six_slices_match_reference_design() {
        let layout = Layout::build(6).unwrap();
        assert_eq!(
            labels(&layout),
            vec![
                vec!["A", "B", "C", "D", "E"],
                vec!["F", "G", "H", "I", "J"],
                vec!["K", "L", "M", "N", "O"],
                vec!["P", "Q", "R", "S", "T"],
                vec!["U", "V", "W", "X", "Y"],
                vec!["Z", "SPACE", "CLEAR"],
            ]
        );
    }

    #[test]
    fn four_slices_of_seven() {
        let layout = Layout::build(4).unwrap();
        let l = labels(&layout);
        assert_eq!(l[0], vec!["A", "B", "C", "D", "E", "F", "G"]);
        assert_eq!(l[1], vec!["H", "I", "J", "K", "L", "M", "N"]);
        assert_eq!(l[2], vec!["O", "P", "Q", "R", "S", "T", "U"]);
        assert_eq!(l[3], vec!["V", "W", "X", "Y", "Z", "SPACE", "CLEAR"]);
    }

    #[test]
    fn seven_slices_of_four() {
        assert_eq!(slice_sizes(7).unwrap(), vec![4; 7]);
    }

    #[test]
    fn sizes_for_all_counts() {
        for n in MIN_SLICES..=MAX_SLICES {
            let sizes = slice_sizes(n).unwrap();
            assert_eq!(sizes.len(), n);
            assert_eq!(sizes.iter().sum::<usize>(), ITEM_COUNT);
            assert!(sizes.iter().all(|&s| s >= 2), "n={n}: {sizes:?}");
            let head = &sizes[..n - 1];
            let (lo, hi) = (head.iter().min().unwrap(), head.iter().max().unwrap());
            assert!(hi - lo <= 1, "n={n}: {sizes:?}");
            assert!(head.windows(2).all(|w| w[0] >= w[1]), "larger first, n={n}");
        }
        assert_eq!(slice_sizes(8).unwrap(), vec![4, 4, 4, 4, 3, 3, 3, 3]);
    }

    #[test]
    fn out_of_range_counts() {
        assert_eq!(Layout::build(1), Err(LayoutError::SliceCount(1)));
        assert_eq!(Layout::build(15), Err(LayoutError::SliceCount(15)));
    }

    #[test]
    fn locate_examples() {
        let six = Layout::build(6).unwrap();
        assert_eq!(six.locate_char('g'), Ok((1, 1)));
        assert_eq!(six.locate_char('G'), Ok((1, 1)));
        assert_eq!(six.locate(Action::ClearLast), Some((5, 2)));
        assert_eq!(six.locate_char(' '), Ok((5, 1)));
        assert_eq!(six.locate_char('7'), Err(LayoutError::Unknown('7')));
        for n in MIN_SLICES..=MAX_SLICES {
            assert_eq!(Layout::build(n).unwrap().locate_char('a'), Ok((0, 0)));
        }
    }

    #[test]
    fn coverage_and_round_trip() {
        for n in MIN_SLICES..=MAX_SLICES {
            let layout = Layout::build(n).unwrap();
            let actions: Vec<Action> = layout.items().map(|(_, _, it)| it.action).collect();
            let expected: Vec<Action> = alphabet().map(|(_, a)| a).collect();
            assert_eq!(actions, expected);
            assert_eq!(actions.iter().filter(|a| **a == Action::ClearLast).count(), 1);
            for (s, i, it) in layout.items() {
                assert_eq!(layout.locate(it.action), Some((s, i)));
                assert_eq!(layout.item(s, i), Some(it));
                assert_eq!(it.shade_rank, i);
            }
        }
    }

    #[test]
    fn clear_on_empty_is_noop() {
        let mut buf = String::new();
        Action::ClearLast.apply(&mut buf);
        assert!(buf.is_empty());
        Action::AppendChar('q').apply(&mut buf);
        Action::AppendSpace.apply(&mut buf);
        assert_eq!(buf, "q ");
    }
}
