"""Independent kinematics and moment-arm oracle for the biped2d fixture.

Re-implements forward kinematics from the model-format convention
(R_c = R_p R_J(q), p_c = p_p + R_p (parent_offset + t(q)) - R_c child_offset),
polyline path lengths, and moment arms r_j = -dl/dq_j by central differences
with h = 1e-5. Writes crates/core/tests/data/biped2d_oracle.json for 1000
random poses.
"""
import json
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
H = 1e-5


def rodrigues(axis, angle):
    k = np.asarray(axis, float)
    k = k / np.linalg.norm(k)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K


class Biped:
    def __init__(self, desc):
        self.desc = desc
        self.links = [l["name"] for l in desc["links"]]
        self.joints = desc["joints"]
        off = 0
        self.dof_offset = []
        for j in self.joints:
            self.dof_offset.append(off)
            off += {"planar3": 3, "revolute1": 1}[j["type"]]
        self.ndof = off

    def fk(self, q):
        rot, pos = {}, {}
        pending = list(range(len(self.joints)))
        while pending:
            for ji in list(pending):
                j = self.joints[ji]
                if j["parent"] != "world" and j["parent"] not in rot:
                    continue
                rp = np.eye(3) if j["parent"] == "world" else rot[j["parent"]]
                pp = np.zeros(3) if j["parent"] == "world" else pos[j["parent"]]
                o = self.dof_offset[ji]
                if j["type"] == "planar3":
                    rj = rodrigues([0, 0, 1], q[o + 2])
                    t = np.array([q[o], q[o + 1], 0.0])
                else:
                    rj = rodrigues(j["axis"], q[o])
                    t = np.zeros(3)
                rc = rp @ rj
                origin = pp + rp @ (np.asarray(j["parent_offset_m"]) + t)
                rot[j["child"]] = rc
                pos[j["child"]] = origin - rc @ np.asarray(j["child_offset_m"])
                pending.remove(ji)
        return rot, pos

    def point(self, rot, pos, link, offset):
        if link == "world":
            return np.asarray(offset, float)
        return pos[link] + rot[link] @ np.asarray(offset, float)

    def length(self, muscle, q):
        rot, pos = self.fk(q)
        pts = [self.point(rot, pos, v["link"], v["offset_m"]) for v in muscle["path"]]
        return sum(np.linalg.norm(b - a) for a, b in zip(pts, pts[1:]))


def main():
    desc = json.loads((ROOT / "crates/core/fixtures/biped2d.json").read_text())
    b = Biped(desc)
    rng = np.random.default_rng(7)
    lo, hi = [], []
    for j in b.joints:
        if j["type"] == "planar3":
            lo += [-1.0, 0.8, -0.5]
            hi += [1.0, 1.4, 0.5]
        else:
            lo.append(j["limits_rad"][0][0])
            hi.append(j["limits_rad"][0][1])
    poses = []
    for _ in range(1000):
        q = rng.uniform(lo, hi)
        rot, pos = b.fk(q)
        lengths, arms = [], []
        for mi, m in enumerate(desc["muscles"]):
            lengths.append(float(b.length(m, q)))
            for d in range(b.ndof):
                qp, qm = q.copy(), q.copy()
                qp[d] += H
                qm[d] -= H
                r = -(b.length(m, qp) - b.length(m, qm)) / (2 * H)
                if abs(r) > 1e-9:
                    arms.append([mi, d, float("%.12e" % r)])
        poses.append(
            {
                "q": [float(x) for x in q],
                "link_pos": [[float("%.12e" % c) for c in pos[n]] for n in b.links],
                "lengths": [float("%.12e" % x) for x in lengths],
                "arms": arms,
            }
        )
    out = ROOT / "crates/core/tests/data/biped2d_oracle.json"
    out.write_text(json.dumps({"h": H, "links": b.links, "poses": poses}, separators=(",", ":")))
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
