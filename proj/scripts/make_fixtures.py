#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Generate the committed test fixtures under tests/fixtures/.

Every count that the C++ tests check against is computed here, independently
of the C++ code, and written into a manifest next to the data it describes.
The output is deterministic: rerunning the script reproduces the same bytes.

Usage: python3 scripts/make_fixtures.py [output_dir]
"""

import json
import random
import sys
from collections import Counter
from pathlib import Path

MASK64 = (1 << 64) - 1

# ---------------------------------------------------------------- taxonomy

# (child, parent, child name). A parent of None declares a root node.
EDGES = [
    (664, None, "Improper Control of a Resource Through its Lifetime"),
    (707, None, "Improper Neutralization"),
    (682, None, "Incorrect Calculation"),
    (691, None, "Insufficient Control Flow Management"),
    (693, None, "Protection Mechanism Failure"),
    (703, None, "Improper Check or Handling of Exceptional Conditions"),
    (118, 664, "Incorrect Access of Indexable Resource"),
    (119, 118, "Improper Restriction of Operations within the Bounds of a Memory Buffer"),
    (787, 119, "Out-of-bounds Write"),
    (125, 119, "Out-of-bounds Read"),
    (120, 119, "Buffer Copy without Checking Size of Input"),
    (824, 119, "Access of Uninitialized Pointer"),
    (122, 787, "Heap-based Buffer Overflow"),
    (121, 787, "Stack-based Buffer Overflow"),
    (825, 119, "Expired Pointer Dereference"),
    (416, 825, "Use After Free"),
    (415, 825, "Double Free"),
    (754, 703, "Improper Check for Unusual or Exceptional Conditions"),
    (476, 754, "NULL Pointer Dereference"),
    (755, 703, "Improper Handling of Exceptional Conditions"),
    (74, 707, "Improper Neutralization of Special Elements in Output Used by a Downstream Component"),
    (20, 707, "Improper Input Validation"),
    (79, 74, "Improper Neutralization of Input During Web Page Generation"),
    (943, 74, "Improper Neutralization of Special Elements in Data Query Logic"),
    (89, 943, "Improper Neutralization of Special Elements used in an SQL Command"),
    (77, 74, "Improper Neutralization of Special Elements used in a Command"),
    (78, 77, "Improper Neutralization of Special Elements used in an OS Command"),
    (94, 74, "Improper Control of Generation of Code"),
    (668, 664, "Exposure of Resource to Wrong Sphere"),
    (706, 664, "Use of Incorrectly-Resolved Name or Reference"),
    (22, 706, "Improper Limitation of a Pathname to a Restricted Directory"),
    (22, 668, "Improper Limitation of a Pathname to a Restricted Directory"),
    (200, 668, "Exposure of Sensitive Information to an Unauthorized Actor"),
    (538, 200, "Insertion of Sensitive Information into Externally-Accessible File or Directory"),
    (532, 538, "Insertion of Sensitive Information into Log File"),
    (209, 200, "Generation of Error Message Containing Sensitive Information"),
    (345, 693, "Insufficient Verification of Data Authenticity"),
    (352, 345, "Cross-Site Request Forgery"),
    (284, 693, "Improper Access Control"),
    (287, 284, "Improper Authentication"),
    (306, 287, "Missing Authentication for Critical Function"),
    (295, 287, "Improper Certificate Validation"),
    (862, 284, "Missing Authorization"),
    (863, 284, "Incorrect Authorization"),
    (269, 284, "Improper Privilege Management"),
    (344, 693, "Use of Invariant Value in Dynamically Changing Context"),
    (798, 344, "Use of Hard-coded Credentials"),
    (327, 693, "Use of a Broken or Risky Cryptographic Algorithm"),
    (400, 664, "Uncontrolled Resource Consumption"),
    (770, 400, "Allocation of Resources Without Limits or Throttling"),
    (404, 664, "Improper Resource Shutdown or Release"),
    (772, 404, "Missing Release of Resource after Effective Lifetime"),
    (401, 772, "Missing Release of Memory after Effective Lifetime"),
    (190, 682, "Integer Overflow or Wraparound"),
    (669, 664, "Incorrect Resource Transfer Between Spheres"),
    (434, 669, "Unrestricted Upload of File with Dangerous Type"),
    (913, 664, "Improper Control of Dynamically-Managed Code Resources"),
    (502, 913, "Deserialization of Untrusted Data"),
    (610, 664, "Externally Controlled Reference to a Resource in Another Sphere"),
    (611, 610, "Improper Restriction of XML External Entity Reference"),
    (601, 610, "URL Redirection to Untrusted Site"),
    (441, 610, "Unintended Proxy or Intermediary"),
    (918, 441, "Server-Side Request Forgery"),
    (362, 691, "Concurrent Execution using Shared Resource with Improper Synchronization"),
]

VOCABULARY = [
    20, 22, 78, 79, 89, 94, 119, 120, 121, 122, 125, 190, 200, 209, 269, 287, 295, 306, 352, 362,
    400, 401, 415, 416, 434, 476, 502, 532, 601, 611, 770, 787, 798, 862, 863, 918,
]

# Words that make a class's descriptions recognizable to a bag-of-ngrams model.
CLASS_PHRASES = {
    20: "improper input validation of user supplied parameters",
    22: "path traversal via dot dot sequences in the file parameter",
    78: "os command injection through shell metacharacters",
    79: "cross site scripting allows injection of arbitrary web script",
    89: "sql injection via crafted query parameter",
    94: "code injection allows evaluation of attacker controlled expressions",
    119: "memory corruption due to improper bounds restriction",
    120: "classic buffer overflow when copying input without size check",
    121: "stack based buffer overflow in the parsing routine",
    122: "heap based buffer overflow while decoding packets",
    125: "out of bounds read when processing malformed headers",
    190: "integer overflow leading to undersized allocation",
    200: "information disclosure exposes sensitive data to unauthorized actors",
    209: "verbose error message reveals internal paths",
    269: "improper privilege management allows escalation to root",
    287: "authentication bypass via forged session token",
    295: "improper certificate validation enables man in the middle",
    306: "missing authentication for a critical administrative function",
    352: "cross site request forgery lets attackers perform actions as the victim",
    362: "race condition in concurrent handler",
    400: "uncontrolled resource consumption causes denial of service",
    401: "memory leak after repeated requests",
    415: "double free in cleanup path",
    416: "use after free in the event dispatcher",
    434: "unrestricted file upload of executable content",
    476: "null pointer dereference crash",
    502: "deserialization of untrusted data leads to remote code execution",
    532: "credentials written to log file",
    601: "open redirect to untrusted site via the next parameter",
    611: "xml external entity expansion discloses local files",
    770: "allocation without limits or throttling exhausts memory",
    787: "out of bounds write corrupts adjacent memory",
    798: "hard coded credentials in firmware",
    862: "missing authorization check on api endpoint",
    863: "incorrect authorization lets low privileged users modify settings",
    918: "server side request forgery to internal services",
}

PRODUCTS = ["Acme Router", "Foobar CMS", "Widget Server", "Nimbus Gateway", "Orbit Mail", "Quasar DB",
            "Helix Portal", "Zephyr Camera", "Lumen Editor", "Vertex Firewall"]


def parents_of():
    parents = {}
    for child, parent, _ in EDGES:
        parents.setdefault(child, set())
        if parent is not None:
            parents[child].add(parent)
            parents.setdefault(parent, set())
    return parents


PARENTS = parents_of()
CHILDREN = {}
for _c, _ps in PARENTS.items():
    for _p in _ps:
        CHILDREN.setdefault(_p, set()).add(_c)


def relatives(cwe):
    """Ids one ChildOf edge away in either direction (depth-1 equivalence)."""
    return sorted(PARENTS.get(cwe, set()) | CHILDREN.get(cwe, set()))


def equivalent(a, b):
    return a == b or b in PARENTS.get(a, set()) or a in PARENTS.get(b, set())


def cwe(n):
    return f"CWE-{n}"


def write_taxonomy(out):
    lines = ["child,parent,child_name"]
    for child, parent, name in EDGES:
        lines.append(f'{cwe(child)},{cwe(parent) if parent is not None else ""},"{name}"')
    (out / "taxonomy.csv").write_text("\n".join(lines) + "\n")
    vocab = ["# target classes for the miniature corpus"] + [cwe(v) for v in VOCABULARY]
    (out / "vocabulary.txt").write_text("\n".join(vocab) + "\n")


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows))


# ---------------------------------------------------------------- hashing oracle

def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & MASK64
    return h


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def split_of(seed, cve_id, eval_fraction, val_share):
    h = splitmix64(fnv1a64(cve_id.encode()) ^ splitmix64(seed))
    u = (h >> 11) / float(1 << 53)
    if u < eval_fraction * val_share:
        return "val"
    if u < eval_fraction:
        return "test"
    return "train"


# ---------------------------------------------------------------- miniature NVD corpus

def description_for(rng, label, cve_id):
    product = rng.choice(PRODUCTS)
    version = f"{rng.randint(1, 9)}.{rng.randint(0, 20)}.{rng.randint(0, 9)}"
    phrase = CLASS_PHRASES.get(label, "unspecified weakness in request handling")
    return f"{product} before {version} has a {phrase} in the {rng.choice(['admin', 'upload', 'login', 'api', 'report'])} component ({cve_id})."


def write_nvd_corpus(out, rng):
    vulnerabilities = []
    ai_labels = []
    truth = []  # (cve_id, nvd_label or None, ai_label or None)
    all_labels = VOCABULARY + [664, 707, 693, 284, 74]  # a few out-of-vocabulary parents too
    seen = set()
    while len(vulnerabilities) < 1000:
        year = rng.randint(2015, 2024)
        seq = rng.randint(1000, 49999)
        cve_id = f"CVE-{year}-{seq:04d}"
        if cve_id in seen:
            continue
        seen.add(cve_id)
        true_label = rng.choice(VOCABULARY)
        roll = rng.random()
        # Labeling pattern of the record.
        if roll < 0.70:
            nvd, ai = true_label, true_label
        elif roll < 0.80:
            rel = relatives(true_label)
            nvd, ai = rng.choice(rel), true_label
        elif roll < 0.88:
            nvd, ai = rng.choice([c for c in all_labels if not equivalent(c, true_label)]), true_label
        elif roll < 0.94:
            nvd, ai = None, true_label
        elif roll < 0.98:
            nvd, ai = true_label, None
        else:
            nvd, ai = None, None

        weaknesses = []
        if nvd is not None:
            if rng.random() < 0.2:
                # Secondary listed first; the Primary entry must win.
                other = rng.choice(all_labels)
                weaknesses.append({"source": "cna@example.org", "type": "Secondary",
                                   "description": [{"lang": "en", "value": cwe(other)}]})
            weaknesses.append({"source": "nvd@nist.gov", "type": "Primary",
                               "description": [{"lang": "en", "value": cwe(nvd)}]})
        elif rng.random() < 0.5:
            weaknesses.append({"source": "nvd@nist.gov", "type": "Primary",
                               "description": [{"lang": "en", "value": rng.choice(["NVD-CWE-noinfo", "NVD-CWE-Other"])}]})

        descriptions = [{"lang": "en", "value": description_for(rng, true_label, cve_id)}]
        if rng.random() < 0.1:
            descriptions.insert(0, {"lang": "es", "value": "Vulnerabilidad en el componente de inicio de sesion."})
        month = rng.randint(1, 12)
        day = rng.randint(1, 28)
        entry = {"cve": {
            "id": cve_id,
            "sourceIdentifier": "cve@mitre.org",
            "published": f"{year}-{month:02d}-{day:02d}T10:15:00.000",
            "lastModified": f"{min(year + 1, 2025)}-{month:02d}-{day:02d}T12:00:00.000",
            "vulnStatus": "Analyzed",
            "descriptions": descriptions,
            "weaknesses": weaknesses,
        }}
        if not weaknesses:
            del entry["cve"]["weaknesses"]
        vulnerabilities.append(entry)
        if ai is not None:
            ai_labels.append({"cve_id": cve_id, "ai_cwe": cwe(ai)})
        truth.append((cve_id, nvd, ai))

    feed = {"resultsPerPage": len(vulnerabilities), "startIndex": 0, "totalResults": len(vulnerabilities),
            "format": "NVD_CVE", "version": "2.0", "timestamp": "2024-06-01T00:00:00.000",
            "vulnerabilities": vulnerabilities}
    (out / "nvd_feed_1000.json").write_text(json.dumps(feed, indent=1) + "\n")
    write_jsonl(out / "ai_labels_1000.jsonl", ai_labels)

    ids = sorted(t[0] for t in truth)
    banned = rng.sample(ids, 40)
    banned_lines = ["# benchmark ids that must never reach a split"]
    banned_lines += [b.lower() if i % 7 == 0 else b for i, b in enumerate(banned)]
    banned_lines += ["  CVE-1999-0001  ", "CVE-2030-99999"]  # absent from the corpus
    (out / "banned_ids.txt").write_text("\n".join(banned_lines) + "\n")

    # Manifest: counted from the raw JSON we just wrote, not from the
    # generator's bookkeeping.
    raw = json.loads((out / "nvd_feed_1000.json").read_text())
    per_year = Counter(int(v["cve"]["id"].split("-")[1]) for v in raw["vulnerabilities"])
    manifest = {
        "entries": len(raw["vulnerabilities"]),
        "per_year": {str(y): per_year[y] for y in sorted(per_year)},
        "ai_labels": len(ai_labels),
        "banned_present": len(banned),
        "banned_absent": 2,
    }
    (out / "nvd_feed_1000.manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


# ---------------------------------------------------------------- 1000-sample hierarchy fixture

def write_hierarchy_fixture(out, rng):
    n, strict_target, rescued_target = 1000, 756, 109
    kinds = ["strict"] * strict_target + ["rescued"] * rescued_target + ["wrong"] * (n - strict_target - rescued_target)
    rng.shuffle(kinds)
    gold_rows, pred_rows = [], []
    with_relatives = [v for v in VOCABULARY if relatives(v)]
    for i, kind in enumerate(kinds):
        cve_id = f"CVE-2024-{20000 + i}"
        gold = rng.choice(with_relatives)
        if kind == "strict":
            top = gold
        elif kind == "rescued":
            top = rng.choice(relatives(gold))
        else:
            top = rng.choice([c for c in VOCABULARY if not equivalent(c, gold)])
        others = [c for c in VOCABULARY if c != top]
        rest = rng.sample(others, 2)
        if kind != "strict" and rng.random() < 0.5 and gold not in rest:
            rest[rng.randrange(2)] = gold
        scores = sorted((round(rng.uniform(0.01, 0.99), 4) for _ in range(3)), reverse=True)
        # Scores must be strictly descending.
        scores = [scores[0] + 0.002, scores[1] + 0.001, scores[2]]
        ranked = [{"cwe": cwe(c), "score": round(s, 4)} for c, s in zip([top] + rest, scores)]
        gold_rows.append({"cve_id": cve_id, "label": cwe(gold)})
        pred_rows.append({"cve_id": cve_id, "ranked": ranked})
    write_jsonl(out / "cti_rcm_gold.jsonl", gold_rows)
    write_jsonl(out / "cti_rcm_predictions.jsonl", pred_rows)

    # Recount from the files with a standalone parent map.
    gold = {r["cve_id"]: int(r["label"][4:]) for r in map(json.loads, (out / "cti_rcm_gold.jsonl").read_text().splitlines())}
    strict = rescued = top3 = 0
    for r in map(json.loads, (out / "cti_rcm_predictions.jsonl").read_text().splitlines()):
        g = gold[r["cve_id"]]
        ids = [int(e["cwe"][4:]) for e in r["ranked"]]
        strict += ids[0] == g
        rescued += ids[0] != g and equivalent(ids[0], g)
        top3 += g in ids[:3]
    manifest = {"n": len(gold), "strict_correct": strict, "rescued": rescued, "top3_correct": top3}
    assert strict == strict_target and rescued == rescued_target, manifest
    (out / "cti_rcm.manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


# ---------------------------------------------------------------- small hand-checkable fixtures

def write_agreement_fixture(out):
    # 6 exact, 2 hierarchy_only (parent/child in taxonomy.csv), 2 disagree.
    pairs = [
        ("CVE-2023-1001", 79, 79), ("CVE-2023-1002", 89, 89), ("CVE-2023-1003", 22, 22),
        ("CVE-2023-1004", 416, 416), ("CVE-2023-1005", 787, 787), ("CVE-2023-1006", 352, 352),
        ("CVE-2023-1007", 787, 122), ("CVE-2023-1008", 119, 125),
        ("CVE-2023-1009", 79, 89), ("CVE-2023-1010", 22, 352),
    ]
    records, ai = [], []
    for cve_id, nvd, label in pairs:
        records.append({"cve_id": cve_id, "description": f"Hand-labeled agreement fixture entry {cve_id} for label merging.",
                        "nvd_cwe": cwe(nvd), "last_modified": "2023-05-01T00:00:00.000", "attack_techniques": None})
        ai.append({"cve_id": cve_id, "ai_cwe": cwe(label)})
    write_jsonl(out / "agreement_records_10.jsonl", records)
    write_jsonl(out / "agreement_ai_10.jsonl", ai)


def write_dedup_fixture(out):
    rows = [
        ("CVE-2021-0005", "2021-03-01T00:00:00.000", "first copy of five"),
        ("CVE-2021-0001", "2021-01-01T00:00:00.000", "older copy of one"),
        ("CVE-2021-0002", "2021-01-02T00:00:00.000", "only copy of two"),
        ("CVE-2021-0001", "2021-06-01T00:00:00.000", "newer copy of one"),
        ("CVE-2021-0003", None, "first undated copy of three"),
        ("CVE-2021-0004", "2021-02-01T00:00:00.000", "only copy of four"),
        ("CVE-2021-0003", None, "second undated copy of three"),
        ("CVE-2021-0006", "2021-02-02T00:00:00.000", "only copy of six"),
        ("CVE-2021-0005", "2021-03-01T00:00:00.000", "second copy of five, same timestamp"),
        ("CVE-2021-10000", "2021-02-03T00:00:00.000", "only copy of ten thousand"),
    ]
    write_jsonl(out / "dedup_10.jsonl", [
        {"cve_id": c, "description": f"Deduplication fixture: {d}.", "nvd_cwe": None, "last_modified": t,
         "attack_techniques": None} for c, t, d in rows])


def write_filter_fixture(out):
    rows = []
    short = {3: "Too short.", 8: "   tiny text here   ", 12: "DoS in foo.", 17: "XSS bug"}
    for i in range(20):
        cve_id = f"CVE-2019-{i + 1:04d}"
        desc = short.get(i) or f"Description number {i} with enough detail to pass the length filter."
        rows.append({"cve_id": cve_id, "description": desc, "nvd_cwe": None, "last_modified": None,
                     "attack_techniques": None})
    write_jsonl(out / "filter_20.jsonl", rows)


def write_split_oracle(out):
    seed, eval_fraction, val_share = 7, 0.5, 0.5
    ids = [f"CVE-2022-{n:04d}" for n in (11, 23, 35, 47, 59, 61, 73, 85, 97, 1009)]
    records, ai = [], []
    for i, cve_id in enumerate(ids):
        label = VOCABULARY[i % len(VOCABULARY)]
        records.append({"cve_id": cve_id, "description": f"Split oracle fixture record {i}.", "nvd_cwe": cwe(label),
                        "last_modified": None, "attack_techniques": None})
        ai.append({"cve_id": cve_id, "ai_cwe": cwe(label)})
    write_jsonl(out / "split_records_10.jsonl", records)
    write_jsonl(out / "split_ai_10.jsonl", ai)
    expected = {cve_id: split_of(seed, cve_id, eval_fraction, val_share) for cve_id in ids}
    (out / "split_oracle_10.json").write_text(json.dumps(
        {"seed": seed, "eval_fraction": eval_fraction, "val_share": val_share, "assignment": expected}, indent=2) + "\n")


def write_synthetic_corpus(out, rng):
    # 5 classes x 40 docs; each class carries one marker token that no other
    # class ever uses, so the corpus is linearly separable.
    markers = ["alphaflaw", "bravoflaw", "charlieflaw", "deltaflaw", "echoflaw"]
    labels = [79, 89, 22, 416, 787]
    filler = ["the", "server", "request", "handler", "allows", "remote", "attackers", "to", "cause", "impact",
              "via", "crafted", "input", "component", "version", "module"]
    rows = []
    for c, (marker, label) in enumerate(zip(markers, labels)):
        for j in range(40):
            words = rng.sample(filler, 6) + [marker]
            rng.shuffle(words)
            rows.append({"cve_id": f"CVE-2020-{(c + 1) * 1000 + j}", "description": " ".join(words), "label": cwe(label)})
    rows.sort(key=lambda r: int(r["cve_id"].split("-")[2]))
    write_jsonl(out / "synthetic_5class_200.jsonl", rows)


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "tests" / "fixtures"
    out.mkdir(parents=True, exist_ok=True)
    write_taxonomy(out)
    write_nvd_corpus(out, random.Random(20240601))
    write_hierarchy_fixture(out, random.Random(1000))
    write_agreement_fixture(out)
    write_dedup_fixture(out)
    write_filter_fixture(out)
    write_split_oracle(out)
    write_synthetic_corpus(out, random.Random(5))


if __name__ == "__main__":
    main()
