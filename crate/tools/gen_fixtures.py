#!/usr/bin/env python3
"""Regenerates the bundled model fixtures in crates/core/fixtures/.

All link frames are aligned with the world frame in the reference pose
(q = 0), so reference-pose world positions are plain vector sums. Tendon
slack lengths are chosen so every fiber sits at its optimal length in the
reference pose: l_slack = r * L_ref, l_opt = (1 - r) * L_ref / cos(alpha).

Usage: python3 tools/gen_fixtures.py
"""

import json
import math
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "fixtures")


def box_inertia(m, x, y, z):
    return [
        [m * (y * y + z * z) / 12.0, 0.0, 0.0],
        [0.0, m * (x * x + z * z) / 12.0, 0.0],
        [0.0, 0.0, m * (x * x + y * y) / 12.0],
    ]


def rnd(v, n=6):
    if isinstance(v, list):
        return [rnd(x, n) for x in v]
    return round(v, n)


class Builder:
    def __init__(self, name, description):
        self.name = name
        self.description = description
        self.links = []
        self.joints = []
        self.muscles = []
        self.contacts = []
        self.pos = {"world": (0.0, 0.0, 0.0)}

    def link(self, name, mass, dims, inertia=None):
        if inertia is None:
            inertia = box_inertia(mass, *dims)
        self.links.append(
            {
                "name": name,
                "mass_kg": mass,
                "inertia_kgm2": rnd(inertia, 8),
                "geometry": {"box": {"extents_m": list(dims)}},
            }
        )

    def joint(self, name, kind, parent, child, parent_offset, child_offset, axis=None, limits=None):
        pp = self.pos[parent]
        self.pos[child] = tuple(pp[i] + parent_offset[i] - child_offset[i] for i in range(3))
        self.joints.append(
            {
                "name": name,
                "type": kind,
                "parent": parent,
                "child": child,
                "axis": axis,
                "limits_rad": limits,
                "parent_offset_m": list(parent_offset),
                "child_offset_m": list(child_offset),
            }
        )

    def world(self, link, off):
        p = self.pos[link]
        return tuple(p[i] + off[i] for i in range(3))

    def muscle(self, name, f_max, path, alpha=0.0, tendon_ratio=0.3):
        pts = [self.world(l, o) for l, o in path]
        length = sum(math.dist(pts[i], pts[i + 1]) for i in range(len(pts) - 1))
        l_slack = tendon_ratio * length
        l_opt = (1.0 - tendon_ratio) * length / math.cos(alpha)
        self.muscles.append(
            {
                "name": name,
                "f_max_n": float(f_max),
                "l_opt_m": rnd(l_opt),
                "l_slack_m": rnd(l_slack),
                "pennation_rad": alpha,
                "path": [{"link": l, "offset_m": rnd(list(o))} for l, o in path],
            }
        )

    def contact(self, link, offset, radius):
        self.contacts.append({"link": link, "offset_m": list(offset), "radius_m": radius})

    def dump(self, fname, extra):
        total = sum(l["mass_kg"] for l in self.links)
        doc = {
            "schema_version": 1,
            "name": self.name,
            "description": self.description,
            "total_mass_kg": round(total, 9),
            "links": self.links,
            "joints": self.joints,
            "muscles": self.muscles,
            "contact_points": self.contacts,
        }
        doc.update(extra)
        with open(os.path.join(OUT, fname), "w") as f:
            json.dump(doc, f, indent=2)
            f.write("\n")


def biped2d():
    b = Builder(
        "biped2d",
        "Planar 7-link biped (torso, thigh/shank/foot per leg) with 16 Hill-type muscles. "
        "x forward, y up, z lateral. Planar root (x, y, pitch) places the torso COM at 1.28 m "
        "in the reference pose; all six revolute joints rotate about the lateral axis. "
        "Hip flexion, knee flexion and ankle dorsiflexion are positive. "
        "Link frames sit at link centres of mass; every fiber is at optimal length at q = 0.",
    )
    b.link("torso", 33.0, (0.20, 0.70, 0.30))
    b.joint("root", "planar3", "world", "torso", (0.0, 1.28, 0.0), (0.0, 0.0, 0.0))
    for s, z in (("l", 0.1), ("r", -0.1)):
        b.link(f"thigh_{s}", 8.5, (0.12, 0.45, 0.12))
        b.link(f"shank_{s}", 3.5, (0.09, 0.45, 0.09))
        b.link(f"foot_{s}", 1.5, (0.26, 0.08, 0.09), inertia=[[0.004, 0, 0], [0, 0.012, 0], [0, 0, 0.02]])
        b.joint(f"hip_{s}", "revolute1", "torso", f"thigh_{s}", (0.0, -0.30, z), (0.0, 0.20, 0.0),
                axis=[0.0, 0.0, 1.0], limits=[[-0.8, 1.6]])
        b.joint(f"knee_{s}", "revolute1", f"thigh_{s}", f"shank_{s}", (0.0, -0.25, 0.0), (0.0, 0.19, 0.0),
                axis=[0.0, 0.0, -1.0], limits=[[-0.05, 2.4]])
        b.joint(f"ankle_{s}", "revolute1", f"shank_{s}", f"foot_{s}", (0.0, -0.26, 0.0), (-0.05, 0.05, 0.0),
                axis=[0.0, 0.0, 1.0], limits=[[-0.8, 0.6]])
    for s, z in (("l", 0.1), ("r", -0.1)):
        T, TH, SH, FT = "torso", f"thigh_{s}", f"shank_{s}", f"foot_{s}"
        b.muscle(f"hip_flexor_{s}", 1200, [(T, (0.02, -0.12, z)), (T, (0.06, -0.30, z)), (TH, (0.02, 0.10, 0.0))], 0.1)
        b.muscle(f"hip_extensor_{s}", 1500, [(T, (-0.10, -0.22, z)), (T, (-0.08, -0.34, z)), (TH, (-0.03, 0.08, 0.0))], 0.05)
        b.muscle(f"knee_extensor_{s}", 3000, [(TH, (0.03, 0.0, 0.0)), (TH, (0.05, -0.22, 0.0)), (SH, (0.04, 0.14, 0.0))], 0.05, 0.35)
        b.muscle(f"knee_flexor_{s}", 600, [(TH, (-0.03, -0.05, 0.0)), (SH, (-0.04, 0.12, 0.0))], 0.4)
        b.muscle(f"ankle_dorsiflexor_{s}", 800, [(SH, (0.03, 0.0, 0.0)), (SH, (0.05, -0.22, 0.0)), (FT, (0.02, 0.03, 0.0))], 0.1, 0.3)
        b.muscle(f"ankle_plantarflexor_{s}", 1500, [(SH, (-0.02, -0.05, 0.0)), (FT, (-0.11, 0.02, 0.0))], 0.2, 0.3)
        b.muscle(f"hamstring_{s}", 1500, [(T, (-0.07, -0.33, z)), (SH, (-0.04, 0.12, 0.0))], 0.2)
        b.muscle(f"rectus_femoris_{s}", 1000, [(T, (0.05, -0.26, z)), (TH, (0.05, -0.22, 0.0)), (SH, (0.04, 0.14, 0.0))], 0.15)
        b.contact(FT, (-0.11, -0.01, 0.0), 0.02)
        b.contact(FT, (0.11, -0.01, 0.0), 0.02)
    b.dump(
        "biped2d.json",
        {
            "locomotion": {
                "torso": "torso",
                "pelvis": "torso",
                "left": {"hip": {"joint": "hip_l", "dof": 0}, "knee": {"joint": "knee_l", "dof": 0},
                         "foot_links": ["foot_l"]},
                "right": {"hip": {"joint": "hip_r", "dof": 0}, "knee": {"joint": "knee_r", "dof": 0},
                          "foot_links": ["foot_r"]},
                "mirror_pairs": [["hip_l", "hip_r"], ["knee_l", "knee_r"], ["ankle_l", "ankle_r"]],
            }
        },
    )


def full_humanoid():
    b = Builder(
        "full_humanoid",
        "Representative 16-link, 31-DOF, 120-muscle humanoid (75 kg). x forward, y up, z lateral "
        "(left positive). Free root at the pelvis; ball joints at lumbar, hips and shoulders; "
        "revolute thorax, neck, knees, ankles, toes and elbows. Flexion is positive for every "
        "sagittal revolute joint and for the z component of the hip and shoulder rotation vectors. "
        "Muscle routing follows common lower-limb/trunk/arm anatomy at via-point resolution; "
        "geometry is plausible, not a reconstruction of any published model. "
        "Every fiber is at optimal length in the reference pose (q = 0).",
    )
    b.link("pelvis", 11.8, (0.20, 0.20, 0.30))
    b.joint("root", "free6", "world", "pelvis", (0.0, 1.0, 0.0), (0.0, 0.0, 0.0))
    b.link("spine", 9.0, (0.18, 0.20, 0.28))
    b.joint("lumbar", "ball3", "pelvis", "spine", (-0.03, 0.08, 0.0), (0.0, -0.10, 0.0),
            limits=[[-0.4, 0.4], [-0.4, 0.4], [-0.6, 0.8]])
    b.link("torso", 17.2, (0.20, 0.32, 0.34))
    b.joint("thorax", "revolute1", "spine", "torso", (0.0, 0.10, 0.0), (0.0, -0.15, 0.0),
            axis=[0.0, 0.0, -1.0], limits=[[-0.3, 0.5]])
    b.link("head", 5.2, (0.18, 0.24, 0.16))
    b.joint("neck", "revolute1", "torso", "head", (0.0, 0.17, 0.0), (0.0, -0.12, 0.0),
            axis=[0.0, 0.0, -1.0], limits=[[-0.6, 0.8]])
    for s, sg in (("l", 1.0), ("r", -1.0)):
        b.link(f"upperarm_{s}", 2.1, (0.08, 0.28, 0.08))
        b.joint(f"shoulder_{s}", "ball3", "torso", f"upperarm_{s}", (0.0, 0.13, 0.18 * sg), (0.0, 0.13, 0.0),
                limits=[[-1.2, 1.2], [-1.0, 1.0], [-1.0, 2.0]])
        b.link(f"forearm_{s}", 1.6, (0.07, 0.32, 0.07))
        b.joint(f"elbow_{s}", "revolute1", f"upperarm_{s}", f"forearm_{s}", (0.0, -0.15, 0.0), (0.0, 0.16, 0.0),
                axis=[0.0, 0.0, 1.0], limits=[[0.0, 2.5]])
    for s, sg in (("l", 1.0), ("r", -1.0)):
        b.link(f"femur_{s}", 7.5, (0.13, 0.40, 0.13))
        b.joint(f"hip_{s}", "ball3", "pelvis", f"femur_{s}", (-0.01, -0.07, 0.085 * sg), (0.0, 0.17, 0.0),
                limits=[[-0.5, 0.5], [-0.6, 0.6], [-0.5, 1.6]])
        b.link(f"tibia_{s}", 3.5, (0.09, 0.43, 0.09))
        b.joint(f"knee_{s}", "revolute1", f"femur_{s}", f"tibia_{s}", (0.0, -0.23, 0.0), (0.0, 0.18, 0.0),
                axis=[0.0, 0.0, -1.0], limits=[[-0.05, 2.4]])
        b.link(f"talus_{s}", 1.0, (0.20, 0.07, 0.09))
        b.joint(f"ankle_{s}", "revolute1", f"tibia_{s}", f"talus_{s}", (0.0, -0.25, 0.0), (-0.04, 0.04, 0.0),
                axis=[0.0, 0.0, 1.0], limits=[[-0.8, 0.6]])
        b.link(f"toes_{s}", 0.2, (0.06, 0.03, 0.09))
        b.joint(f"mtp_{s}", "revolute1", f"talus_{s}", f"toes_{s}", (0.10, -0.02, 0.0), (-0.025, 0.0, 0.0),
                axis=[0.0, 0.0, 1.0], limits=[[-0.5, 0.9]])
        b.contact(f"talus_{s}", (-0.09, -0.04, 0.0), 0.02)
        b.contact(f"talus_{s}", (0.08, -0.04, 0.03 * sg), 0.02)
        b.contact(f"talus_{s}", (0.08, -0.04, -0.03 * sg), 0.02)
        b.contact(f"toes_{s}", (0.03, -0.02, 0.0), 0.02)

    for s, sg in (("l", 1.0), ("r", -1.0)):
        P, SP, TO, HD = "pelvis", "spine", "torso", "head"
        F, T, TA, TS = f"femur_{s}", f"tibia_{s}", f"talus_{s}", f"toes_{s}"
        UA, FA = f"upperarm_{s}", f"forearm_{s}"

        def p(link, x, y, z):
            return (link, (x, y, z * sg))

        m = lambda name, *a, **k: b.muscle(f"{name}_{s}", *a, **k)
        # hip
        m("glut_max1", 573, [p(P, -0.12, 0.02, 0.06), p(P, -0.13, -0.05, 0.09), p(F, -0.03, 0.12, 0.02)])
        m("glut_max2", 819, [p(P, -0.13, -0.01, 0.05), p(P, -0.14, -0.08, 0.08), p(F, -0.03, 0.08, 0.03)])
        m("glut_max3", 552, [p(P, -0.15, -0.06, 0.03), p(P, -0.14, -0.12, 0.06), p(F, -0.02, 0.04, 0.03)])
        m("glut_med1", 819, [p(P, -0.02, 0.04, 0.12), p(F, -0.01, 0.16, 0.05)], 0.14)
        m("glut_med2", 573, [p(P, -0.06, 0.05, 0.11), p(F, -0.02, 0.16, 0.05)])
        m("glut_med3", 653, [p(P, -0.10, 0.02, 0.09), p(F, -0.03, 0.16, 0.04)], 0.33)
        m("glut_min1", 270, [p(P, 0.0, 0.0, 0.11), p(F, 0.0, 0.16, 0.05)], 0.17)
        m("glut_min2", 285, [p(P, -0.03, 0.0, 0.11), p(F, -0.01, 0.16, 0.05)])
        m("glut_min3", 323, [p(P, -0.06, -0.01, 0.10), p(F, -0.02, 0.16, 0.05)], 0.02)
        m("add_brev", 429, [p(P, 0.04, -0.10, 0.02), p(F, -0.01, 0.05, -0.01)], 0.1)
        m("add_long", 627, [p(P, 0.05, -0.09, 0.015), p(F, 0.0, -0.02, -0.01)], 0.12)
        m("add_mag1", 381, [p(P, -0.02, -0.13, 0.03), p(F, -0.01, 0.0, -0.01)], 0.09)
        m("add_mag2", 343, [p(P, -0.03, -0.13, 0.03), p(F, -0.01, -0.08, -0.01)], 0.09)
        m("add_mag3", 488, [p(P, -0.05, -0.13, 0.03), p(F, -0.01, -0.18, -0.02)], 0.09)
        m("pectineus", 266, [p(P, 0.04, -0.07, 0.04), p(F, -0.01, 0.09, 0.0)])
        m("iliacus", 1073, [p(P, 0.0, 0.02, 0.07), p(P, 0.04, -0.07, 0.07), p(F, 0.0, 0.12, 0.0)], 0.12)
        m("psoas", 1113, [p(SP, -0.01, -0.02, 0.03), p(P, 0.04, -0.06, 0.06), p(F, 0.0, 0.12, 0.0)], 0.14)
        m("quad_fem", 381, [p(P, -0.08, -0.12, 0.05), p(F, -0.03, 0.13, 0.02)])
        m("piriformis", 444, [p(P, -0.13, 0.0, 0.02), p(P, -0.10, -0.04, 0.07), p(F, -0.01, 0.18, 0.04)], 0.17)
        # biarticular hip/knee
        m("tfl", 233, [p(P, 0.05, 0.01, 0.12), p(F, 0.03, 0.05, 0.04), p(T, 0.01, 0.16, 0.03)], 0.05, 0.6)
        m("sartorius", 156, [p(P, 0.07, 0.0, 0.11), p(F, 0.0, -0.05, -0.03), p(T, -0.02, 0.14, -0.02), p(T, 0.01, 0.11, -0.01)], 0.0, 0.2)
        m("gracilis", 162, [p(P, 0.03, -0.11, 0.01), p(T, -0.02, 0.14, -0.02), p(T, 0.0, 0.12, -0.01)], 0.05, 0.4)
        m("rect_fem", 1169, [p(P, 0.05, -0.02, 0.10), p(F, 0.04, -0.22, 0.0), p(T, 0.04, 0.15, 0.0)], 0.09, 0.5)
        m("semimem", 1288, [p(P, -0.08, -0.11, 0.06), p(T, -0.03, 0.15, -0.01)], 0.26, 0.45)
        m("semiten", 410, [p(P, -0.09, -0.12, 0.05), p(T, -0.03, 0.13, -0.02), p(T, 0.0, 0.11, -0.01)], 0.09, 0.4)
        m("bifemlh", 896, [p(P, -0.09, -0.12, 0.06), p(T, -0.02, 0.14, 0.03)], 0.0, 0.4)
        m("bifemsh", 804, [p(F, -0.01, -0.05, 0.02), p(T, -0.02, 0.14, 0.03)], 0.4)
        # knee
        m("vas_med", 1294, [p(F, 0.01, -0.05, -0.01), p(F, 0.04, -0.22, -0.01), p(T, 0.04, 0.15, 0.0)], 0.09, 0.45)
        m("vas_int", 1365, [p(F, 0.03, -0.03, 0.0), p(F, 0.04, -0.21, 0.0), p(T, 0.04, 0.15, 0.0)], 0.05, 0.45)
        m("vas_lat", 1871, [p(F, 0.0, 0.0, 0.03), p(F, 0.04, -0.21, 0.01), p(T, 0.04, 0.15, 0.0)], 0.09, 0.45)
        # ankle and toes
        m("med_gas", 1113, [p(F, -0.02, -0.21, -0.02), p(T, -0.03, 0.14, -0.02), p(TA, -0.09, 0.03, 0.0)], 0.17, 0.6)
        m("lat_gas", 488, [p(F, -0.02, -0.21, 0.02), p(T, -0.03, 0.14, 0.02), p(TA, -0.09, 0.03, 0.0)], 0.14, 0.6)
        m("soleus", 2839, [p(T, -0.01, 0.05, 0.0), p(TA, -0.09, 0.03, 0.0)], 0.44, 0.65)
        m("tib_post", 1270, [p(T, -0.01, 0.05, 0.0), p(T, -0.02, -0.23, -0.01), p(TA, 0.0, 0.0, -0.02)], 0.21, 0.6)
        m("flex_dig", 310, [p(T, -0.01, 0.0, 0.0), p(T, -0.02, -0.24, -0.01), p(TA, 0.02, -0.02, -0.01), p(TS, 0.02, -0.01, 0.0)], 0.12, 0.6)
        m("flex_hal", 322, [p(T, -0.02, -0.03, 0.01), p(T, -0.02, -0.24, -0.01), p(TA, 0.03, -0.02, -0.02), p(TS, 0.03, -0.01, -0.01)], 0.17, 0.6)
        m("tib_ant", 603, [p(T, 0.02, 0.0, 0.01), p(T, 0.03, -0.22, -0.01), p(TA, 0.03, 0.02, -0.01)], 0.09, 0.5)
        m("per_brev", 348, [p(T, 0.0, -0.05, 0.02), p(T, -0.02, -0.25, 0.03), p(TA, 0.02, 0.0, 0.03)], 0.09, 0.5)
        m("per_long", 754, [p(T, 0.0, 0.08, 0.02), p(T, -0.02, -0.25, 0.03), p(TA, 0.04, -0.01, 0.0)], 0.17, 0.55)
        m("per_tert", 90, [p(T, 0.01, -0.08, 0.02), p(T, 0.03, -0.22, 0.02), p(TA, 0.04, 0.01, 0.02)], 0.23, 0.5)
        m("ext_dig", 341, [p(T, 0.01, 0.08, 0.01), p(T, 0.03, -0.22, 0.0), p(TA, 0.08, 0.0, 0.01), p(TS, 0.02, 0.0, 0.0)], 0.14, 0.55)
        m("ext_hal", 108, [p(T, 0.01, -0.02, 0.0), p(T, 0.03, -0.22, -0.01), p(TA, 0.08, 0.0, -0.01), p(TS, 0.02, 0.0, -0.01)], 0.09, 0.55)
        # trunk and neck
        m("ercspn", 2500, [p(P, -0.10, 0.06, 0.03), p(SP, -0.06, 0.0, 0.03), p(TO, -0.08, -0.05, 0.03)], 0.0, 0.2)
        m("intobl", 900, [p(P, 0.05, 0.06, 0.10), p(TO, 0.08, -0.12, 0.06)], 0.0, 0.2)
        m("extobl", 900, [p(P, 0.06, 0.05, 0.11), p(SP, 0.06, 0.05, 0.09), p(TO, 0.09, -0.05, 0.10)], 0.0, 0.2)
        m("rect_abd", 800, [p(P, 0.08, -0.05, 0.02), p(SP, 0.09, 0.0, 0.03), p(TO, 0.11, -0.05, 0.03)], 0.0, 0.2)
        m("stern_mast", 300, [p(TO, 0.06, 0.16, 0.03), p(HD, 0.0, -0.05, 0.05)], 0.0, 0.3)
        m("splenius", 400, [p(TO, -0.06, 0.12, 0.02), p(HD, -0.06, -0.02, 0.03)], 0.0, 0.3)
        # shoulder and elbow
        m("delt_ant", 1100, [p(TO, 0.05, 0.13, 0.15), p(UA, 0.03, 0.02, 0.01)], 0.38)
        m("delt_mid", 1100, [p(TO, 0.0, 0.16, 0.19), p(UA, 0.0, 0.02, 0.03)], 0.26)
        m("delt_post", 940, [p(TO, -0.06, 0.13, 0.15), p(UA, -0.03, 0.02, 0.01)], 0.31)
        m("pec_major", 980, [p(TO, 0.10, 0.05, 0.04), p(UA, 0.02, 0.08, -0.01)], 0.3)
        m("lat_dorsi", 1130, [p(P, -0.10, 0.08, 0.02), p(TO, -0.10, 0.0, 0.12), p(UA, -0.01, 0.07, -0.01)], 0.44)
        m("teres_major", 430, [p(TO, -0.09, 0.06, 0.12), p(UA, -0.01, 0.07, -0.01)])
        m("supraspin", 500, [p(TO, -0.03, 0.16, 0.12), p(UA, 0.0, 0.14, 0.02)], 0.12, 0.35)
        m("infraspin", 860, [p(TO, -0.09, 0.10, 0.12), p(UA, -0.02, 0.12, 0.01)], 0.33)
        m("biceps", 850, [p(TO, 0.03, 0.12, 0.17), p(UA, 0.02, 0.0, 0.0), p(FA, 0.02, 0.12, 0.0)], 0.0, 0.45)
        m("tri_long", 800, [p(TO, -0.03, 0.10, 0.17), p(UA, -0.03, -0.15, 0.0), p(FA, -0.02, 0.18, 0.0)], 0.17, 0.45)
        m("tri_lat", 620, [p(UA, -0.02, 0.05, 0.01), p(UA, -0.03, -0.15, 0.0), p(FA, -0.02, 0.18, 0.0)], 0.15, 0.3)
        m("brachialis", 990, [p(UA, 0.01, -0.05, 0.0), p(FA, 0.02, 0.12, 0.0)], 0.0, 0.25)

    b.dump(
        "full_humanoid.json",
        {
            "locomotion": {
                "torso": "torso",
                "pelvis": "pelvis",
                "left": {"hip": {"joint": "hip_l", "dof": 2}, "knee": {"joint": "knee_l", "dof": 0},
                         "foot_links": ["talus_l", "toes_l"]},
                "right": {"hip": {"joint": "hip_r", "dof": 2}, "knee": {"joint": "knee_r", "dof": 0},
                          "foot_links": ["talus_r", "toes_r"]},
                "mirror_pairs": [
                    ["hip_l", "hip_r"], ["knee_l", "knee_r"], ["ankle_l", "ankle_r"], ["mtp_l", "mtp_r"],
                    ["shoulder_l", "shoulder_r"], ["elbow_l", "elbow_r"],
                ],
            }
        },
    )


def pendulum_muscle():
    b = Builder(
        "pendulum_muscle",
        "Single 0.5 m pole hanging from a world-fixed hinge (revolute about z), driven by an "
        "antagonist muscle pair anchored to the world 0.15 m either side of the hinge. "
        "Positive angle swings the pole tip toward +x, shortening muscle_pos.",
    )
    b.link("pole", 1.0, (0.04, 0.5, 0.04))
    b.joint("hinge", "revolute1", "world", "pole", (0.0, 0.0, 0.0), (0.0, 0.25, 0.0),
            axis=[0.0, 0.0, 1.0], limits=[[-1.5, 1.5]])
    b.muscle("muscle_pos", 100, [("world", (0.15, 0.0, 0.0)), ("pole", (0.0, 0.1, 0.0))], 0.0, 0.3)
    b.muscle("muscle_neg", 100, [("world", (-0.15, 0.0, 0.0)), ("pole", (0.0, 0.1, 0.0))], 0.0, 0.3)
    b.dump("pendulum_muscle.json", {})


if __name__ == "__main__":
    biped2d()
    full_humanoid()
    pendulum_muscle()
