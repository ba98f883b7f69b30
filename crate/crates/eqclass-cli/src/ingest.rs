//! Input parsing: class-size files and edge lists.
//!
//! A class-size file holds one positive integer per line. An edge list
//! starts with a `n m` header followed by `m` lines `u v` of 0-based
//! vertex ids; connected components become the classes. The two formats
//! are told apart by the token count of the first significant line. Blank
//! lines and `#` comments are ignored in both.

use std::path::Path;

use eqclass::oracle::UnionFind;
use eqclass::partition::{ClassSizes, GroupSequence};

use crate::usermap::UserLabelMap;
use crate::CliError;

/// Significant lines of a file with their 1-based line numbers.
fn significant_lines(text: &str) -> impl Iterator<Item = (u64, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            None
        } else {
            Some((i as u64 + 1, trimmed))
        }
    })
}

fn parse_u64(path: &str, line_no: u64, token: &str, what: &str) -> Result<u64, CliError> {
    token
        .parse::<u64>()
        .map_err(|_| CliError::parse(path, Some(line_no), format!("bad {what}: {token:?}")))
}

/// Parse an input file into the canonical group sequence plus the map from
/// user ids to labels.
pub fn load_input(path: &Path) -> Result<(GroupSequence, UserLabelMap), CliError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(CliError::io(format!("reading {display}")))?;
    let mut lines = significant_lines(&text).peekable();
    let Some(&(first_no, first)) = lines.peek() else {
        return Err(CliError::parse(&display, None, "empty input file"));
    };
    let token_count = first.split_whitespace().count();
    match token_count {
        1 => load_sizes(&display, lines),
        2 => load_edges(&display, first_no, lines),
        _ => Err(CliError::parse(
            &display,
            Some(first_no),
            format!("expected one size or a 'n m' header, found {token_count} tokens"),
        )),
    }
}

fn load_sizes<'a>(
    path: &str,
    lines: impl Iterator<Item = (u64, &'a str)>,
) -> Result<(GroupSequence, UserLabelMap), CliError> {
    let mut sizes = Vec::new();
    for (line_no, line) in lines {
        if line.split_whitespace().count() != 1 {
            return Err(CliError::parse(
                path,
                Some(line_no),
                "expected one class size per line",
            ));
        }
        let size = parse_u64(path, line_no, line, "class size")?;
        if size == 0 {
            return Err(CliError::parse(
                path,
                Some(line_no),
                "class size must be positive",
            ));
        }
        sizes.push(size);
    }
    let sizes = ClassSizes::new(sizes).map_err(|e| CliError::parse(path, None, e.to_string()))?;
    let seq = GroupSequence::from_sizes(&sizes);
    let map = UserLabelMap::identity(seq.n());
    Ok((seq, map))
}

fn load_edges<'a>(
    path: &str,
    header_no: u64,
    mut lines: impl Iterator<Item = (u64, &'a str)>,
) -> Result<(GroupSequence, UserLabelMap), CliError> {
    let (_, header) = lines.next().expect("peeked header exists");
    let mut it = header.split_whitespace();
    let n = parse_u64(path, header_no, it.next().unwrap(), "vertex count")?;
    let m = parse_u64(path, header_no, it.next().unwrap(), "edge count")?;
    if n == 0 {
        return Err(CliError::parse(
            path,
            Some(header_no),
            "vertex count must be positive",
        ));
    }
    let mut uf = UnionFind::new(n as usize);
    let mut seen_edges = 0u64;
    for (line_no, line) in lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(CliError::parse(path, Some(line_no), "expected 'u v'"));
        }
        let u = parse_u64(path, line_no, tokens[0], "vertex")?;
        let v = parse_u64(path, line_no, tokens[1], "vertex")?;
        if u >= n || v >= n {
            return Err(CliError::parse(
                path,
                Some(line_no),
                format!("vertex out of range [0, {n})"),
            ));
        }
        uf.union(u as usize, v as usize);
        seen_edges += 1;
    }
    if seen_edges != m {
        return Err(CliError::parse(
            path,
            None,
            format!("header promised {m} edges, found {seen_edges}"),
        ));
    }

    // Components in ascending order of their smallest vertex, vertices
    // ascending within each; the canonical layout then assigns labels.
    let components = uf.members();
    let sizes = ClassSizes::new(components.iter().map(|c| c.len() as u64).collect())
        .expect("components are nonempty");
    let seq = GroupSequence::from_sizes(&sizes);

    // Classes of equal size keep their min-vertex order within the group.
    let mut by_size: std::collections::HashMap<u64, Vec<&Vec<usize>>> = Default::default();
    for comp in &components {
        by_size.entry(comp.len() as u64).or_default().push(comp);
    }
    let mut user_to_label = vec![0u64; n as usize];
    for (gi, group) in seq.groups().iter().enumerate() {
        let classes = by_size.remove(&group.size).expect("group size present");
        debug_assert_eq!(classes.len() as u64, group.count);
        for (ci, comp) in classes.into_iter().enumerate() {
            for (rank, &vertex) in comp.iter().enumerate() {
                let id = eqclass::partition::ClassId {
                    group: gi as u64 + 1,
                    index_in_group: ci as u64 + 1,
                };
                user_to_label[vertex] = seq.label_of(id, rank as u64 + 1).expect("layout in range");
            }
        }
    }
    let map = UserLabelMap::from_user_to_label(user_to_label)
        .map_err(|e| CliError::parse(path, None, e))?;
    Ok((seq, map))
}
