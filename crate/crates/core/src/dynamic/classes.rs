//! Interned limb classes. A class is the label of a vertex: its ancestor bits,
//! optional marks, and the `S`-capped multiset of its children's classes. Two
//! vertices share a class exactly when their `S`-capped limbs are isomorphic.

use std::collections::HashMap;

use crate::minimal::Bits;

pub type ClassId = u32;

/// Marks carried by scratch labels during root finding.
pub const MARK_A: u8 = 1;
pub const MARK_B: u8 = 2;
pub const MARK_R: u8 = 4;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelKey {
    pub bits: Bits,
    pub marks: u8,
    /// Sorted by class, counts in `1..=S`.
    pub children: Vec<(ClassId, u32)>,
}

#[derive(Clone, Debug)]
pub struct ClassInfo {
    pub key: LabelKey,
    /// Vertex count of the longest root-to-leaf path of the capped limb.
    pub height: usize,
    /// Ancestors (bit `k` = distance `k + 1`) reached by the component of
    /// the limb containing its root.
    pub head: u32,
    /// The same for the other components of the limb, deduplicated.
    pub loose: Vec<u32>,
}

impl ClassInfo {
    /// Whether the limb, viewed as a whole component, is connected.
    pub fn is_connected_root(&self) -> bool {
        self.loose.is_empty()
    }

    /// Whether every component of the limb reaches some ancestor.
    pub fn hangs(&self) -> bool {
        self.head != 0 && self.loose.iter().all(|&m| m != 0)
    }
}

#[derive(Default)]
pub struct Interner {
    ids: HashMap<LabelKey, ClassId>,
    infos: Vec<ClassInfo>,
}

impl Interner {
    pub fn info(&self, c: ClassId) -> &ClassInfo {
        &self.infos[c as usize]
    }

    pub fn len(&self) -> usize {
        self.infos.len()
    }

    pub fn intern(&mut self, key: LabelKey) -> ClassId {
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let mut head = key.bits as u32;
        let mut loose = Vec::new();
        let mut height = 1;
        for &(c, _) in &key.children {
            let ci = &self.infos[c as usize];
            height = height.max(ci.height + 1);
            for m in std::iter::once(ci.head).chain(ci.loose.iter().copied()) {
                if m & 1 == 1 {
                    head |= m >> 1;
                } else {
                    loose.push(m >> 1);
                }
            }
        }
        loose.sort_unstable();
        loose.dedup();
        let id = self.infos.len() as ClassId;
        self.infos.push(ClassInfo {
            key: key.clone(),
            height,
            head,
            loose,
        });
        self.ids.insert(key, id);
        id
    }

    /// Builds the label from exact child counts, capping them at `s`.
    pub fn intern_counts(
        &mut self,
        bits: Bits,
        marks: u8,
        counts: impl IntoIterator<Item = (ClassId, usize)>,
        s: usize,
    ) -> ClassId {
        let mut children: Vec<(ClassId, u32)> = Vec::new();
        for (c, n) in counts {
            if n == 0 {
                continue;
            }
            children.push((c, n as u32));
        }
        children.sort_unstable();
        let mut merged: Vec<(ClassId, u32)> = Vec::with_capacity(children.len());
        for (c, n) in children {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += n,
                _ => merged.push((c, n)),
            }
        }
        for e in &mut merged {
            e.1 = e.1.min(s as u32);
        }
        self.intern(LabelKey {
            bits,
            marks,
            children: merged,
        })
    }
}
