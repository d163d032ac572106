//! Composite detection.
//!
//! Each single refactoring contributes one grouping key per composite kind it
//! can take part in. Records sharing a key form a composite. Grouping never
//! looks at commits or timestamps.

use std::collections::{BTreeMap, HashMap};

use crate::model::{Composite, CompositeKind, ElementRef, RefactoringKind, RefactoringRecord};

/// A composite kind together with the anchor element its members share.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClusterKey {
    pub kind: CompositeKind,
    pub element: ElementRef,
}

impl ClusterKey {
    fn new(kind: CompositeKind, element: &ElementRef) -> ClusterKey {
        ClusterKey {
            kind,
            element: ElementRef {
                class_fqn: element.class_fqn.clone(),
                member: element.member.clone(),
                file_path: None,
            },
        }
    }
}

/// Every `(kind, anchor)` a record can contribute to.
pub fn keys_for(record: &RefactoringRecord) -> Vec<ClusterKey> {
    use CompositeKind as C;
    use RefactoringKind as R;
    match record.kind {
        R::Extract | R::ExtractMove => vec![
            ClusterKey::new(C::MethodComposition, &record.target),
            ClusterKey::new(C::MethodDecomposition, &record.source),
        ],
        R::Move | R::MoveRename => vec![ClusterKey::new(C::ClassDecomposition, &record.source.enclosing_class())],
        R::Inline => vec![ClusterKey::new(C::CompositeInlineMethod, &record.source)],
        R::PullUpMethod => vec![ClusterKey::new(C::CompositePullUpMethod, &record.target)],
        R::PushDownMethod => vec![ClusterKey::new(C::CompositePushDownMethod, &record.source)],
        R::PullUpField => vec![ClusterKey::new(C::CompositePullUpField, &record.target)],
        R::PushDownField => vec![ClusterKey::new(C::CompositePushDownField, &record.source)],
    }
}

/// Groups records into composites of two or more members, in canonical order.
pub fn cluster(records: &[RefactoringRecord]) -> Vec<Composite> {
    let mut groups: HashMap<ClusterKey, Vec<&RefactoringRecord>> = HashMap::new();
    for record in records {
        for key in keys_for(record) {
            groups.entry(key).or_default().push(record);
        }
    }
    let composites = groups
        .into_iter()
        .filter(|(_, members)| members.len() >= 2)
        .map(|(key, members)| Composite::new(key.kind, key.element, members.into_iter().cloned().collect()))
        .collect();
    canonical_sort(composites)
}

/// Sorts by kind, anchor class, anchor member, then earliest member.
pub fn canonical_sort(mut composites: Vec<Composite>) -> Vec<Composite> {
    composites.sort_by(|a, b| {
        a.kind.cmp(&b.kind).then_with(|| a.anchor.cmp(&b.anchor)).then_with(|| {
            match (a.members.first(), b.members.first()) {
                (Some(x), Some(y)) => x.member_order(y),
                _ => a.size().cmp(&b.size()),
            }
        })
    });
    composites
}

/// Whether two records can sit in the same composite of `kind`, evaluated
/// directly on the record pair.
pub fn pair_condition(kind: CompositeKind, r1: &RefactoringRecord, r2: &RefactoringRecord) -> bool {
    let accepted = kind.accepted_kinds();
    if !accepted.contains(&r1.kind) || !accepted.contains(&r2.kind) {
        return false;
    }
    let same_class = |a: &ElementRef, b: &ElementRef| a.class_fqn == b.class_fqn;
    let same_member = |a: &ElementRef, b: &ElementRef| a.member == b.member;
    match kind {
        CompositeKind::ClassDecomposition => same_class(&r1.source, &r2.source),
        k if k.anchored_on_target() => same_member(&r1.target, &r2.target) && same_class(&r1.target, &r2.target),
        _ => same_member(&r1.source, &r2.source) && same_class(&r1.source, &r2.source),
    }
}

/// Reference implementation: pairwise conditions followed by transitive
/// closure. Quadratic; meant for test-sized inputs.
///
/// # Panics
///
/// Panics on more than 10,000 records.
pub fn brute_force_cluster(records: &[RefactoringRecord]) -> Vec<Composite> {
    assert!(
        records.len() <= 10_000,
        "brute_force_cluster is limited to 10,000 records"
    );
    let mut composites = Vec::new();
    for kind in CompositeKind::ALL {
        let eligible: Vec<&RefactoringRecord> = records
            .iter()
            .filter(|r| kind.accepted_kinds().contains(&r.kind))
            .collect();
        let mut sets = DisjointSets::new(eligible.len());
        for i in 0..eligible.len() {
            for j in i + 1..eligible.len() {
                if pair_condition(kind, eligible[i], eligible[j]) {
                    sets.union(i, j);
                }
            }
        }
        let mut components: BTreeMap<usize, Vec<&RefactoringRecord>> = BTreeMap::new();
        for (i, record) in eligible.iter().enumerate() {
            components.entry(sets.find(i)).or_default().push(record);
        }
        for members in components.into_values().filter(|m| m.len() >= 2) {
            let first = members[0];
            let anchor = match kind {
                CompositeKind::ClassDecomposition => first.source.enclosing_class(),
                k if k.anchored_on_target() => first.target.clone(),
                _ => first.source.clone(),
            };
            let anchor = ElementRef {
                file_path: None,
                ..anchor
            };
            composites.push(Composite::new(kind, anchor, members.into_iter().cloned().collect()));
        }
    }
    canonical_sort(composites)
}

/// Union by size with path halving.
struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    fn new(len: usize) -> Self {
        DisjointSets {
            parent: (0..len).collect(),
            size: vec![1; len],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Member;

    fn rec(id: &str, kind: RefactoringKind, src: (&str, &str), dst: (&str, &str)) -> RefactoringRecord {
        let element = |(class, member): (&str, &str)| {
            if kind.is_field_level() {
                ElementRef::field(class, member).unwrap()
            } else {
                ElementRef::method(class, member).unwrap()
            }
        };
        RefactoringRecord::new(id, "p", "abc", None, kind, element(src), element(dst)).unwrap()
    }

    fn key(kind: CompositeKind, class: &str, member: Member) -> ClusterKey {
        ClusterKey {
            kind,
            element: ElementRef::new(class, member).unwrap(),
        }
    }

    #[test]
    fn extract_contributes_composition_and_decomposition_keys() {
        let r = rec("1", RefactoringKind::Extract, ("A", "m()"), ("A", "m1()"));
        assert_eq!(
            keys_for(&r),
            vec![
                key(CompositeKind::MethodComposition, "A", Member::Method("m1()".into())),
                key(CompositeKind::MethodDecomposition, "A", Member::Method("m()".into())),
            ]
        );
    }

    #[test]
    fn pull_up_and_move_keys() {
        let r = rec(
            "1",
            RefactoringKind::PullUpMethod,
            ("SubFoo1", "m()"),
            ("SuperFoo", "m()"),
        );
        assert_eq!(
            keys_for(&r),
            vec![key(
                CompositeKind::CompositePullUpMethod,
                "SuperFoo",
                Member::Method("m()".into())
            )]
        );
        let r = rec("1", RefactoringKind::Move, ("Foo", "m()"), ("Bar", "m()"));
        assert_eq!(
            keys_for(&r),
            vec![key(CompositeKind::ClassDecomposition, "Foo", Member::Class)]
        );
    }

    #[test]
    fn field_keys_use_field_anchor() {
        let up = rec("1", RefactoringKind::PullUpField, ("A", "x"), ("Base", "x"));
        assert_eq!(
            keys_for(&up),
            vec![key(
                CompositeKind::CompositePullUpField,
                "Base",
                Member::Field("x".into())
            )]
        );
        let down = rec("1", RefactoringKind::PushDownField, ("Base", "x"), ("A", "x"));
        assert_eq!(
            keys_for(&down),
            vec![key(
                CompositeKind::CompositePushDownField,
                "Base",
                Member::Field("x".into())
            )]
        );
    }

    #[test]
    fn same_source_different_targets() {
        let records = vec![
            rec("1", RefactoringKind::Extract, ("A", "m()"), ("A", "x()")),
            rec("2", RefactoringKind::Extract, ("A", "m()"), ("A", "y()")),
        ];
        for out in [cluster(&records), brute_force_cluster(&records)] {
            assert_eq!(out.len(), 1);
            assert_eq!(out[0].kind, CompositeKind::MethodDecomposition);
        }
    }

    #[test]
    fn same_source_same_target_yields_both_kinds() {
        let records = vec![
            rec("1", RefactoringKind::Extract, ("A", "m()"), ("A", "x()")),
            rec("2", RefactoringKind::Extract, ("A", "m()"), ("A", "x()")),
        ];
        let out = cluster(&records);
        assert_eq!(out, brute_force_cluster(&records));
        let kinds: Vec<_> = out.iter().map(|c| c.kind).collect();
        assert_eq!(
            kinds,
            vec![CompositeKind::MethodComposition, CompositeKind::MethodDecomposition]
        );
        assert!(out.iter().all(|c| c.size() == 2));
    }

    #[test]
    fn extract_chains_are_not_merged() {
        // m -> x, then x -> y: different anchors, no composite.
        let records = vec![
            rec("1", RefactoringKind::Extract, ("A", "m()"), ("A", "x()")),
            rec("2", RefactoringKind::Extract, ("A", "x()"), ("A", "y()")),
        ];
        assert!(cluster(&records).is_empty());
        assert!(brute_force_cluster(&records).is_empty());
    }

    #[test]
    fn move_rename_groups_by_source_class_only() {
        let records = vec![
            rec("1", RefactoringKind::Move, ("Foo", "a()"), ("Bar", "a()")),
            rec("2", RefactoringKind::MoveRename, ("Foo", "b()"), ("Baz", "c()")),
            rec("3", RefactoringKind::Inline, ("Foo", "d()"), ("Foo", "e()")),
        ];
        let out = cluster(&records);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].anchor, ElementRef::class("Foo").unwrap());
        assert_eq!(out, brute_force_cluster(&records));
    }

    #[test]
    fn empty_input() {
        assert!(cluster(&[]).is_empty());
        assert!(brute_force_cluster(&[]).is_empty());
    }

    #[test]
    fn canonical_order_is_kind_then_anchor() {
        let records = vec![
            rec("1", RefactoringKind::PushDownMethod, ("S", "m()"), ("A", "m()")),
            rec("2", RefactoringKind::PushDownMethod, ("S", "m()"), ("B", "m()")),
            rec("3", RefactoringKind::Move, ("Z", "a()"), ("Y", "a()")),
            rec("4", RefactoringKind::Move, ("Z", "b()"), ("Y", "b()")),
            rec("5", RefactoringKind::Move, ("C", "a()"), ("Y", "a()")),
            rec("6", RefactoringKind::Move, ("C", "b()"), ("Y", "b()")),
        ];
        let out = cluster(&records);
        let labels: Vec<_> = out.iter().map(|c| (c.kind, c.anchor.label())).collect();
        assert_eq!(
            labels,
            vec![
                (CompositeKind::ClassDecomposition, "C".to_string()),
                (CompositeKind::ClassDecomposition, "Z".to_string()),
                (CompositeKind::CompositePushDownMethod, "S.m()".to_string()),
            ]
        );
    }
}
