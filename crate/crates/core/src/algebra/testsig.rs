//! Shared fixtures for algebra tests: the family/company relational
//! pair and the dollars/euros shopping pair.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use super::{
    AnalogyMap, Carrier, DomainInterpretation, PhiSort, PrimImpl, PrimitiveDecl, Signature, Sort,
    SymbolKind, Term,
};

pub(crate) fn family_signature() -> Signature {
    relational_signature("person", "parent")
}

pub(crate) fn relational_signature(sort: &str, relation: &str) -> Signature {
    let mut primitives = BTreeMap::new();
    primitives.insert(
        String::from(relation),
        PrimitiveDecl {
            inputs: alloc::vec![Sort::Entity(sort.into())],
            output: Sort::Set(sort.into()),
            kind: SymbolKind::Function,
            implementation: PrimImpl::RelationImage,
        },
    );
    primitives.insert(
        "contains".into(),
        PrimitiveDecl {
            inputs: alloc::vec![Sort::Set(sort.into()), Sort::Entity(sort.into())],
            output: Sort::Bool,
            kind: SymbolKind::Predicate,
            implementation: PrimImpl::Contains,
        },
    );
    Signature {
        sorts: [String::from(sort)].into_iter().collect(),
        primitives,
    }
}

/// Family domain over entities {a, b, c} with the given parent edges.
pub(crate) fn family_domain(edges: &[(&str, &str)]) -> DomainInterpretation {
    relational_domain("family", "person", "parent", &["a", "b", "c"], edges)
}

pub(crate) fn relational_domain(
    name: &str,
    sort: &str,
    relation: &str,
    entities: &[&str],
    edges: &[(&str, &str)],
) -> DomainInterpretation {
    let mut carriers = BTreeMap::new();
    carriers.insert(
        String::from(sort),
        Carrier::Finite(entities.iter().map(|e| String::from(*e)).collect()),
    );
    let mut params = BTreeMap::new();
    params.insert(String::from(relation), Vec::new());
    params.insert(String::from("contains"), Vec::new());
    let mut relations = BTreeMap::new();
    relations.insert(
        String::from(relation),
        edges
            .iter()
            .map(|(x, y)| (String::from(*x), String::from(*y)))
            .collect::<BTreeSet<_>>(),
    );
    DomainInterpretation {
        name: name.into(),
        signature: relational_signature(sort, relation),
        carriers,
        params,
        relations,
        ties: Vec::new(),
    }
}

pub(crate) fn money_signature() -> Signature {
    let money = || Sort::Numeric("money".into());
    let scalar = || Sort::Numeric("scalar".into());
    let mut primitives = BTreeMap::new();
    primitives.insert(
        "multiply".into(),
        PrimitiveDecl {
            inputs: alloc::vec![money(), scalar()],
            output: money(),
            kind: SymbolKind::Function,
            implementation: PrimImpl::Multiply,
        },
    );
    primitives.insert(
        "discount".into(),
        PrimitiveDecl {
            inputs: alloc::vec![money(), scalar()],
            output: money(),
            kind: SymbolKind::Function,
            implementation: PrimImpl::Discount,
        },
    );
    primitives.insert(
        "add".into(),
        PrimitiveDecl {
            inputs: alloc::vec![money(), money()],
            output: money(),
            kind: SymbolKind::Function,
            implementation: PrimImpl::Add,
        },
    );
    Signature {
        sorts: ["money".into(), "scalar".into()].into_iter().collect(),
        primitives,
    }
}

/// Shopping domain; `gain` scales every primitive (1.0 = exact
/// arithmetic).
pub(crate) fn money_domain(name: &str, gain: f64) -> DomainInterpretation {
    let mut carriers = BTreeMap::new();
    carriers.insert("money".into(), Carrier::Interval { lo: 0.0, hi: 100.0 });
    carriers.insert("scalar".into(), Carrier::Interval { lo: 0.0, hi: 1.0 });
    let mut params = BTreeMap::new();
    params.insert("multiply".into(), alloc::vec![gain]);
    params.insert("discount".into(), alloc::vec![gain]);
    params.insert("add".into(), alloc::vec![gain]);
    DomainInterpretation {
        name: name.into(),
        signature: money_signature(),
        carriers,
        params,
        relations: BTreeMap::new(),
        ties: Vec::new(),
    }
}

/// Buy `#1` items at price `#0`, apply discount rate `#2`, add
/// shipping `#3`.
pub(crate) fn shopping_term() -> Term {
    let money = |slot| Term::input(slot, Sort::Numeric("money".into()));
    let scalar = |slot| Term::input(slot, Sort::Numeric("scalar".into()));
    Term::apply(
        "add",
        alloc::vec![
            Term::apply(
                "discount",
                alloc::vec![
                    Term::apply("multiply", alloc::vec![money(0), scalar(1)]),
                    scalar(2),
                ],
            ),
            money(3),
        ],
    )
}

/// The grandparent-style predicate for a relational signature.
pub(crate) fn grand_predicate(sort: &str, relation: &str) -> Term {
    let entity = |slot| Term::input(slot, Sort::Entity(sort.into()));
    Term::apply(
        "contains",
        alloc::vec![
            Term::apply(
                relation,
                alloc::vec![Term::apply(relation, alloc::vec![entity(0)])],
            ),
            entity(1),
        ],
    )
}

/// Family -> company analogy over isomorphic three-entity graphs.
pub(crate) fn family_company_analogy() -> AnalogyMap {
    AnalogyMap {
        phi: [(
            String::from("person"),
            PhiSort::FiniteMap(
                [("a", "a2"), ("b", "b2"), ("c", "c2")]
                    .into_iter()
                    .map(|(x, y)| (String::from(x), String::from(y)))
                    .collect(),
            ),
        )]
        .into_iter()
        .collect(),
        correspondence: [("parent", "manager"), ("contains", "contains")]
            .into_iter()
            .map(|(a, b)| (String::from(a), String::from(b)))
            .collect(),
        sort_map: [(String::from("person"), String::from("employee"))]
            .into_iter()
            .collect(),
        bilipschitz: None,
    }
}

/// Dollars -> euros analogy: money maps affinely, scalars are shared.
pub(crate) fn currency_analogy(scale: f64, offset: f64) -> AnalogyMap {
    AnalogyMap {
        phi: [
            (String::from("money"), PhiSort::AffineMap { scale, offset }),
            (String::from("scalar"), PhiSort::IdentityMap),
        ]
        .into_iter()
        .collect(),
        correspondence: [("multiply", "multiply"), ("discount", "discount"), ("add", "add")]
            .into_iter()
            .map(|(a, b)| (String::from(a), String::from(b)))
            .collect(),
        sort_map: BTreeMap::new(),
        bilipschitz: Some((libm::fabs(scale), libm::fabs(scale))),
    }
}
