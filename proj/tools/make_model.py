#!/usr/bin/env python3
"""Build the model scene and its tet mesh.

Writes <out>/model.obj plus a TetGen fileset (.node/.ele/.neigh/.face).
With the `tetgen` package the scene is a box room, an icosphere and a tilted
plate, meshed by TetGen. Without it, random points are Delaunay-tetrahedralized
and the scene is the hull plus the boundaries of two clusters of tets.
"""
import argparse
import itertools
import sys
from pathlib import Path

import numpy as np

SIZE = 4.0


def icosphere(center, radius, levels):
    t = (1 + 5 ** 0.5) / 2
    v = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t),
         (0, -1, -t), (0, 1, -t), (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    f = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
         (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
         (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    v = [np.array(p, float) / np.linalg.norm(p) for p in v]
    for _ in range(levels):
        mid = {}

        def middle(a, b):
            key = (min(a, b), max(a, b))
            if key not in mid:
                m = v[a] + v[b]
                v.append(m / np.linalg.norm(m))
                mid[key] = len(v) - 1
            return mid[key]

        nf = []
        for a, b, c in f:
            ab, bc, ca = middle(a, b), middle(b, c), middle(c, a)
            nf += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        f = nf
    return np.array(v) * radius + center, np.array(f)


def plate(corner, u, w, n):
    pts = [corner + u * i / n + w * j / n for j in range(n + 1) for i in range(n + 1)]
    tris = []
    for j, i in itertools.product(range(n), range(n)):
        a = j * (n + 1) + i
        tris += [(a, a + 1, a + n + 2), (a, a + n + 2, a + n + 1)]
    return np.array(pts), np.array(tris)


def box_walls(n):
    """Walls 0..5 (-x, +x, -y, +y, -z, +z) on an n x n grid, normals facing inward."""
    pts, tris, mats = [], [], []
    for axis, side in itertools.product(range(3), range(2)):
        a1, a2 = [k for k in range(3) if k != axis]
        base = len(pts)
        for j in range(n + 1):
            for i in range(n + 1):
                p = np.zeros(3)
                p[axis] = side * SIZE
                p[a1], p[a2] = SIZE * i / n, SIZE * j / n
                pts.append(p)
        inward = 1 if side == 0 else -1
        for j, i in itertools.product(range(n), range(n)):
            a = base + j * (n + 1) + i
            quad = [(a, a + 1, a + n + 2), (a, a + n + 2, a + n + 1)]
            for t in quad:
                e = np.cross(pts[t[1]] - pts[t[0]], pts[t[2]] - pts[t[0]])
                tris.append(t if e[axis] * inward > 0 else (t[0], t[2], t[1]))
                mats.append(2 * axis + side)
    return np.array(pts), np.array(tris), mats


def build_scene():
    parts = [box_walls(2)]
    sv, sf = icosphere(np.array([1.3, 1.4, 1.5]), 0.8, 1)
    parts.append((sv, sf, [6] * len(sf)))
    pv, pf = plate(np.array([2.4, 1.9, 0.9]), np.array([1.1, 0.0, 0.35]), np.array([0.2, 1.3, 1.6]), 2)
    parts.append((pv, pf, [7] * len(pf)))
    verts, tris, mats = [], [], []
    for v, f, m in parts:
        off = sum(len(x) for x in verts)
        verts.append(v)
        tris.append(np.asarray(f) + off)
        mats += m
    verts = np.vstack(verts)
    tris = np.vstack(tris)
    # Merge duplicated wall corners.
    _, index, inverse = np.unique(np.round(verts, 12), axis=0, return_index=True, return_inverse=True)
    order = np.argsort(index)
    remap = np.empty_like(order)
    remap[order] = np.arange(len(order))
    return verts[index[order]], remap[inverse.ravel()][tris], mats


def write_obj(path, verts, tris, mats):
    with open(path, "w") as f:
        f.write("# model scene\n")
        for p in verts:
            f.write("v %.17g %.17g %.17g\n" % tuple(p))
        current = None
        for t, m in zip(tris, mats):
            if m != current:
                f.write("usemtl %d\n" % m)
                current = m
            f.write("f %d %d %d\n" % tuple(t + 1))


def mesh_tetgen(verts, tris, max_volume):
    import tetgen

    gen = tetgen.TetGen(verts, tris)
    nodes, elems = gen.tetrahedralize(plc=True, quality=True, minratio=1.5, maxvolume=max_volume)[:2]
    return np.asarray(nodes, float), np.asarray(elems, int)


def face_set(elems):
    faces = set()
    for t in elems:
        for j in range(4):
            faces.add(tuple(sorted(np.delete(t, j))))
    return faces


def delaunay_model(count, seed):
    """Random Delaunay mesh; the scene is taken from its own faces."""
    from scipy.spatial import Delaunay

    rng = np.random.default_rng(seed)
    corners = np.array(list(itertools.product([0.0, SIZE], repeat=3)))
    corners += rng.uniform(-0.02, 0.02, corners.shape)
    nodes = np.vstack([corners, rng.uniform(0.05, SIZE - 0.05, (count, 3))]).astype(np.float32).astype(float)
    elems = orient(nodes, Delaunay(nodes).simplices)

    owner = {}
    for t, tet in enumerate(elems):
        for j in range(4):
            owner.setdefault(tuple(sorted(np.delete(tet, j))), []).append(t)
    centroid = nodes[elems].mean(axis=1)
    region = np.zeros(len(elems), int)
    blobs = [(np.array([1.3, 1.4, 1.5]), 0.8), (np.array([2.9, 2.6, 2.4]), 0.7)]
    for k, (c, r) in enumerate(blobs):
        region[np.linalg.norm(centroid - c, axis=1) < r] = k + 1

    tris, mats = [], []
    for face, ts in sorted(owner.items()):
        if len(ts) == 1:
            t = ts[0]
            inward = centroid[t] - nodes[list(face)].mean(axis=0)
            n = np.cross(nodes[face[1]] - nodes[face[0]], nodes[face[2]] - nodes[face[0]])
            axis = int(np.argmax(np.abs(n)))
            tri = face if np.dot(n, inward) > 0 else (face[0], face[2], face[1])
            tris.append(tri)
            mats.append(2 * axis + (inward[axis] < 0))
        elif region[ts[0]] != region[ts[1]]:
            tris.append(face)
            mats.append(5 + max(region[ts[0]], region[ts[1]]))
    return nodes, elems, nodes, np.array(tris), mats


def orient(nodes, elems):
    a, b, c, d = (nodes[elems[:, k]] for k in range(4))
    vol = np.einsum("ij,ij->i", np.cross(b - a, c - a), d - a)
    elems = elems.copy()
    flip = vol < 0
    elems[flip, 0], elems[flip, 1] = elems[flip, 1], elems[flip, 0].copy()
    if np.any(np.abs(vol) < 1e-12):
        sys.exit("degenerate tetrahedron")
    return elems


def neighbors(elems):
    owner = {}
    for t, tet in enumerate(elems):
        for j in range(4):
            owner.setdefault(tuple(sorted(np.delete(tet, j))), []).append(t)
    out = -np.ones((len(elems), 4), int)
    for t, tet in enumerate(elems):
        for j in range(4):
            for o in owner[tuple(sorted(np.delete(tet, j)))]:
                if o != t:
                    out[t, j] = o
    return out


def on_triangle(p, tri, tol):
    a, b, c = tri
    n = np.cross(b - a, c - a)
    n /= np.linalg.norm(n)
    if abs(np.dot(n, p - a)) > tol:
        return False
    for u, v in ((a, b), (b, c), (c, a)):
        if np.dot(np.cross(v - u, p - u), n) < -tol:
            return False
    return True


def surface_faces(nodes, elems, verts, tris, tol=1e-9):
    """Mesh faces lying on a scene triangle, with the (1-based) triangle as marker."""
    out = []
    lo = np.array([verts[t].min(axis=0) for t in tris]) - tol
    hi = np.array([verts[t].max(axis=0) for t in tris]) + tol
    for face in sorted(face_set(elems)):
        p = nodes[list(face)]
        cand = np.where(np.all(p.min(axis=0) >= lo, axis=1) & np.all(p.max(axis=0) <= hi, axis=1))[0]
        for k in cand:
            if all(on_triangle(q, verts[tris[k]], tol) for q in p):
                out.append((face, k + 1))
                break
    return out


def write_fileset(stem, nodes, elems, faces, source):
    with open(f"{stem}.node", "w") as f:
        f.write(f"# {source}\n{len(nodes)} 3 0 0\n")
        for i, p in enumerate(nodes):
            f.write("%d %.17g %.17g %.17g\n" % (i + 1, *p))
    with open(f"{stem}.ele", "w") as f:
        f.write(f"{len(elems)} 4 0\n")
        for i, t in enumerate(elems):
            f.write("%d %d %d %d %d\n" % (i + 1, *(t + 1)))
    with open(f"{stem}.neigh", "w") as f:
        f.write(f"{len(elems)} 4\n")
        for i, n in enumerate(neighbors(elems)):
            f.write("%d %s\n" % (i + 1, " ".join(str(x + 1 if x >= 0 else -1) for x in n)))
    with open(f"{stem}.face", "w") as f:
        f.write(f"{len(faces)} 1\n")
        for i, (face, marker) in enumerate(faces):
            f.write("%d %d %d %d %d\n" % (i + 1, *(np.array(face) + 1), marker))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "model"))
    ap.add_argument("--mesher", choices=["auto", "tetgen", "delaunay"], default="auto")
    ap.add_argument("--max-volume", type=float, default=0.01)
    ap.add_argument("--points", type=int, default=3000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    mesher = args.mesher
    if mesher == "auto":
        try:
            import tetgen  # noqa: F401
            mesher = "tetgen"
        except ImportError:
            mesher = "delaunay"
    if mesher == "tetgen":
        verts, tris, mats = build_scene()
        nodes, elems = mesh_tetgen(verts, tris, args.max_volume)
        elems = orient(nodes, elems)
        source = "TetGen -pq1.5a%g" % args.max_volume
    else:
        nodes, elems, verts, tris, mats = delaunay_model(args.points, args.seed)
        source = "Delaunay of %d random points, seed %d" % (args.points, args.seed)
    # Group triangles by material, in id order.
    order = np.argsort(mats, kind="stable")
    tris, mats = np.asarray(tris)[order], [mats[i] for i in order]
    assert sorted(set(mats)) == list(range(len(set(mats))))
    write_obj(out / "model.obj", verts, tris, mats)
    faces = surface_faces(nodes, elems, verts, tris)
    write_fileset(out / "model", nodes, elems, faces, source)
    print(f"{source}: {len(nodes)} points, {len(elems)} tets, {len(faces)} surface faces, "
          f"{len(tris)} scene triangles")


if __name__ == "__main__":
    main()
