// Untimed listings with the `else nilP` branches restored.
pub const VERIFIER_UNTIMED: &str = "
-(Commit @ A1 : t1' → V? : t1 ⊎ AS1) .
if t1 = t1' + d(A1,V?) ∧ d(A1,V?) ≥ 0 then (
  +(n(V?,#f1) @ V? : t2? → AS2?) .
  -(n(V?,#f1) ⊕ N_P @ A3 : t3' → V? : t3 ⊎ AS3) .
  if t3 = t3' + d(A3,V?) ∧ d(A3,V?) ≥ 0 then (
    if t3 ⊖ t2? ≤ 2*d then (
      -(S_P @ A4 : t4' → V? : t4 ⊎ AS4) .
      if t4 = t4' + d(A4,V?) ∧ d(A4,V?) ≥ 0 then (
        if open(N_P,S_P,Commit) then (
          -(sign(P,n(V?,#f1) ; N_P ⊕ n(V?,#f1)) @ A5 : t5' → V? : t5 ⊎ AS5) .
          if t5 = t5' + d(A5,V?) ∧ d(A5,V?) ≥ 0 then nilP)))))";

pub const PROVER_UNTIMED: &str = "
+(commit(n(P?,#f1),s(P?,#f2)) @ P? : t1? → AS1?) .
-(N_V @ A2 : t2' → P? : t2 ⊎ AS2) .
if t2 = t2' + d(A2,P?) ∧ d(A2,P?) ≥ 0 then (
  +(N_V ⊕ n(P?,#f1) @ P? : t3? → AS3?) .
  +(s(P?,#f2) @ P? : t4? → AS4?) .
  +(sign(P?,N_V ; n(P?,#f1) ⊕ N_V) @ P? : t5? → AS5?))";

pub const FORWARD_UNTIMED: &str = "
-(X @ A1 : t1 → I : t1' ⊎ AS1) .
if t1' = t1 + d(A1,I) ∧ d(A1,I) ≥ 0 then +(X @ I : t2? → AS)";

pub const CONC_UNTIMED: &str = "
-(X @ A1 : t1 → I : t1' ⊎ AS1) .
if t1' = t1 + d(A1,I) ∧ d(A1,I) ≥ 0 then (
  -(Y @ A2 : t2 → I : t2' ⊎ AS2) .
  if t2' = t2 + d(A2,I) ∧ d(A2,I) ≥ 0 then +(X ; Y @ I : t3? → AS))";

pub const VERIFIER_STRAND: &str = "(verifier): [
  -(Commit @ A1 : t1' -> V : t1 ⊎ AS1),
  (t1 = t1' + d(A1,V) ∧ d(A1,V) ≥ 0),
  +(n(V,f1) @ V : t2 -> AS2),
  -(n(V,f1) ⊕ N_P @ A3 : t3' -> V : t3 ⊎ AS3),
  (t3 = t3' + d(A3,V) ∧ d(A3,V) ≥ 0),
  (t3 ⊖ t2 ≤ 2*d),
  -(S_P @ A4 : t4' -> V : t4 ⊎ AS4),
  (t4 = t4' + d(A4,V) ∧ d(A4,V) ≥ 0),
  open(N_P,S_P,Commit),
  -(sign(P,n(V,f1) ; N_P ⊕ n(V,f1)) @ A5 : t5' -> V : t5 ⊎ AS5),
  (t5 = t5' + d(A5,V) ∧ d(A5,V) ≥ 0) ]";

pub const PROVER_STRAND: &str = "(prover): [
  +(commit(n(P,f1),s(P,f2)) @ P : t1 -> AS1),
  -(N_V @ A2 : t2' -> P : t2 ⊎ AS2),
  (t2 = t2' + d(A2,P) ∧ d(A2,P) ≥ 0),
  +(N_V ⊕ n(P,f1) @ P : t3 -> AS3),
  +(s(P,f2) @ P : t4 -> AS4),
  +(sign(P,N_V ; n(P,f1) ⊕ N_V) @ P : t5 -> AS5) ]";
