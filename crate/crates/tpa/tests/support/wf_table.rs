use tpa::process::WfClause;

use WfClause::*;

/// Process text and the expected outcome: `None` for well-formed, otherwise the
/// clause reported.
pub const WF_TABLE: &[(&str, Option<WfClause>)] = &[
    // wf(nilP) and wf(P . nilP)
    ("nilP", None),
    ("+(a @ $t1) . nilP", None),
    // send and receive
    ("+(a @ $t1)", None),
    ("-(X @ $t1)", None),
    ("-(X @ $t1) . +(X @ $t2)", None),
    ("+(n(A?, #f1) @ $t1)", None),
    ("-(X @ $t1) . +(X @ $t1)", Some(TimeVariableReused)),
    ("+(a @ $t1) . -(X @ $t1)", Some(TimeVariableReused)),
    ("+(n(a, $t1) @ $t1)", Some(TimeInMessage)),
    ("-(X @ $t1) . +(X ; $t1 @ $t2)", Some(TimeInMessage)),
    ("+(#f1 @ $t1)", Some(MisplacedFresh)),
    ("(-(X @ $t1) ? +(a @ $t2)) . +(X @ $t3)", Some(UnsharedVariable)),
    ("-(X @ $t1) . (-(Y @ $t2) ? +(a @ $t3)) . +(Y @ $t4)", Some(UnsharedVariable)),
    ("-(X @ $t1) . (-(Y @ $t2) ? -(Y @ $t3)) . +(Y @ $t4)", None),
    // conditionals
    ("-(X @ $t1) . if X == a then +(b @ $t2)", None),
    ("-(X @ $t1) . if X == a then +(b @ $t2) else +(c @ $t3)", None),
    ("-(X @ $t1) . if $t1 <= d then +(X @ $t2)", None),
    ("if a == a then +(b @ $t1)", Some(ConditionalAtStart)),
    ("if $t1 <= d then +(b @ $t2)", Some(ConditionalAtStart)),
    ("-(X @ $t1) . if X == a then nilP else +(b @ $t2)", Some(EmptyThenBranch)),
    ("-(X @ $t1) . if Y == a then +(b @ $t2)", Some(UnboundCondition)),
    ("-(X @ $t1) . if $t2 <= d then +(b @ $t3)", Some(UnboundCondition)),
    ("-(X @ $t1) . if X == a then +(b @ $t2) else -(c @ $t1)", Some(TimeVariableReused)),
    ("-(X @ $t1) . if X == a then -(c @ $t1)", Some(TimeVariableReused)),
    // choice
    ("-(X @ $t1) . (nilP ? +(X @ $t2))", None),
    ("-(X @ $t1) . (+(X @ $t2) ? nilP)", None),
    ("-(X @ $t1) . (nilP ? nilP)", Some(EmptyChoice)),
    ("-(X @ $t1) . (+(X @ $t2) ? +(X @ $t1))", Some(TimeVariableReused)),
];

/// Process text and the names in its shared-variable set.
pub const SHVAR_TABLE: &[(&str, &[&str])] = &[
    ("nilP", &[]),
    ("+(m(X) @ $t1)", &["X", "t1"]),
    ("-(X @ $t1) . +(Y @ $t2)", &["X", "t1", "Y", "t2"]),
    ("(+(a(X, Y) @ $t1) ? +(b(X) @ $t2)) . -(Z @ $t3)", &["X", "Z", "t3"]),
    ("-(X @ $t1) . if Y == a then +(b(W) @ $t2) else +(c(W) @ $t3)", &["X", "t1", "Y", "W"]),
    ("-(X @ $t1) . if $t1 <= d then +(b(W) @ $t2)", &["X", "t1"]),
];
