//! The hyperoctahedral Weyl group of `GSp_{2g}` and parabolic double cosets.

use crate::flags::ParahoricType;

/// Signed permutation: `w[i] = ±(j+1)` means `e_i ↦ ±e_j`.
pub type SignedPerm = Vec<i8>;

fn compose(u: &[i8], w: &[i8]) -> SignedPerm {
    w.iter().map(|&x| x.signum() * u[x.unsigned_abs() as usize - 1]).collect()
}

pub fn hyperoctahedral(g: usize) -> Vec<SignedPerm> {
    fn perms(rest: Vec<i8>, cur: &mut Vec<i8>, out: &mut Vec<SignedPerm>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for (k, &x) in rest.iter().enumerate() {
            let mut r = rest.clone();
            r.remove(k);
            for s in [1, -1] {
                cur.push(s * x);
                perms(r.clone(), cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    perms((1..=g as i8).collect(), &mut Vec::new(), &mut out);
    out
}

/// Generators of `S_{b_1} × S_{b_2 - b_1} × … × B_{g - b_last}` for the
/// breakpoints `blocks`.
pub fn levi_weyl_generators(g: usize, blocks: &[usize]) -> Vec<SignedPerm> {
    let id: SignedPerm = (1..=g as i8).collect();
    let top = blocks.last().copied().unwrap_or(0);
    let block_of = |a: usize| blocks.iter().filter(|&&d| d <= a).count();
    let mut gens = Vec::new();
    for i in 0..g.saturating_sub(1) {
        if block_of(i) == block_of(i + 1) {
            let mut s = id.clone();
            s.swap(i, i + 1);
            gens.push(s);
        }
    }
    for i in top..g {
        let mut s = id.clone();
        s[i] = -s[i];
        gens.push(s);
    }
    gens
}

/// `|W_L \ W / W_{L_D}|` where `L` is the Levi of the stabilizer of an
/// isotropic subspace of rank `r`.
pub fn bruhat_count(g: usize, r: usize, t: &ParahoricType) -> usize {
    let elems = hyperoctahedral(g);
    let index: std::collections::HashMap<&SignedPerm, usize> = elems.iter().enumerate().map(|(k, w)| (w, k)).collect();
    let left = levi_weyl_generators(g, if r == 0 { &[] } else { std::slice::from_ref(&r) });
    let right = levi_weyl_generators(g, &t.d);
    let mut parent: Vec<usize> = (0..elems.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (k, w) in elems.iter().enumerate() {
        let neighbours = left.iter().map(|u| compose(u, w)).chain(right.iter().map(|u| compose(w, u)));
        for y in neighbours {
            let (a, b) = (find(&mut parent, k), find(&mut parent, index[&y]));
            parent[a] = parent[a].min(b);
            parent[b] = parent[a];
        }
    }
    (0..elems.len()).filter(|&k| find(&mut parent, k) == k).count()
}
