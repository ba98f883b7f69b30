//! Bijection between user element ids `[0, n)` and internal labels `[1, n]`.

use eqclass::bits::{bits_for, PackedIntVec};
use eqclass::dynamic::RelabelEvent;
use eqclass::serialize::Field;

use crate::CliError;

pub const USER_MAP_FIELD: &str = "user_map";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserLabelMap {
    user_to_label: Vec<u64>,
    label_to_user: Vec<u64>,
}

impl UserLabelMap {
    /// User id `u` holds label `u + 1`; the layout used for class-size input.
    pub fn identity(n: u64) -> Self {
        Self::from_user_to_label((1..=n).collect()).expect("identity is a bijection")
    }

    pub fn from_user_to_label(user_to_label: Vec<u64>) -> Result<Self, String> {
        let n = user_to_label.len() as u64;
        let mut label_to_user = vec![u64::MAX; n as usize + 1];
        for (user, &label) in user_to_label.iter().enumerate() {
            if label == 0 || label > n {
                return Err(format!("label {label} out of range for n = {n}"));
            }
            if label_to_user[label as usize] != u64::MAX {
                return Err(format!("label {label} mapped twice"));
            }
            label_to_user[label as usize] = user as u64;
        }
        Ok(UserLabelMap {
            user_to_label,
            label_to_user,
        })
    }

    pub fn n(&self) -> u64 {
        self.user_to_label.len() as u64
    }

    pub fn label_of_user(&self, user: u64) -> Option<u64> {
        self.user_to_label.get(user as usize).copied()
    }

    pub fn user_of_label(&self, label: u64) -> Option<u64> {
        if label == 0 || label > self.n() {
            return None;
        }
        Some(self.label_to_user[label as usize])
    }

    /// Re-thread the map through an old-to-new label permutation.
    pub fn apply_relabel(&mut self, event: &RelabelEvent) {
        let n = self.n();
        debug_assert_eq!(event.len(), n);
        let mut old_to_new = vec![0u64; n as usize + 1];
        for (old, new) in event.iter() {
            old_to_new[old as usize] = new;
        }
        for label in self.user_to_label.iter_mut() {
            *label = old_to_new[*label as usize];
        }
        for (user, &label) in self.user_to_label.iter().enumerate() {
            self.label_to_user[label as usize] = user as u64;
        }
        debug_assert!(self.is_bijection());
    }

    pub fn is_bijection(&self) -> bool {
        let n = self.n();
        let mut seen = vec![false; n as usize + 1];
        for &label in &self.user_to_label {
            if label == 0 || label > n || seen[label as usize] {
                return false;
            }
            seen[label as usize] = true;
            if self.label_to_user[label as usize] >= n {
                return false;
            }
        }
        true
    }

    /// Bits the map occupies in a dump (packed, one label per user id).
    pub fn space_bits(&self) -> u64 {
        self.n() * bits_for(self.n()) as u64
    }

    pub fn to_field(&self) -> Field {
        Field::packed(
            USER_MAP_FIELD,
            &PackedIntVec::from_values(bits_for(self.n()), self.user_to_label.iter().copied()),
        )
    }

    pub fn from_field(n: u64, field: Field, path: &str) -> Result<Self, CliError> {
        let packed = field
            .expect_width(bits_for(n))
            .and_then(|f| f.into_packed())
            .map_err(|e| CliError::parse(path, None, e.to_string()))?;
        if packed.len() != n {
            return Err(CliError::parse(
                path,
                None,
                format!("label map holds {} entries, expected {n}", packed.len()),
            ));
        }
        Self::from_user_to_label(packed.iter().collect())
            .map_err(|e| CliError::parse(path, None, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_round_trips() {
        let map = UserLabelMap::identity(5);
        assert!(map.is_bijection());
        assert_eq!(map.label_of_user(0), Some(1));
        assert_eq!(map.label_of_user(4), Some(5));
        assert_eq!(map.label_of_user(5), None);
        assert_eq!(map.user_of_label(3), Some(2));
        assert_eq!(map.user_of_label(0), None);
        assert_eq!(map.user_of_label(6), None);
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(UserLabelMap::from_user_to_label(vec![1, 1]).is_err());
        assert!(UserLabelMap::from_user_to_label(vec![0]).is_err());
        assert!(UserLabelMap::from_user_to_label(vec![3, 1]).is_err());
    }

    #[test]
    fn field_round_trip() {
        let map = UserLabelMap::from_user_to_label(vec![3, 1, 2]).unwrap();
        let field = map.to_field();
        let back = UserLabelMap::from_field(3, field, "test").unwrap();
        assert_eq!(back, map);
    }
}
