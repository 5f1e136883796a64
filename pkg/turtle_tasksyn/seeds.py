"""
Seed derivation for deterministic synthesis runs.

Every random choice in the pipeline draws from ``random.Random`` seeded with
``derive_seed(parent, stage, index)``. The rule is part of the output
contract: the same request seed always reproduces the same files.
"""
import hashlib
import random

SEED_MODULUS = 2**63

# Stage indices mixed into derived seeds.
STAGE_TEMPLATE = 1
STAGE_SOLVE = 2
STAGE_WORLD = 3
STAGE_POSE = 4
STAGE_PLACEMENT = 5


def derive_seed(parent: int, stage: int, index: int) -> int:
    """
    Derive a child seed.

    Args:
        parent: Seed of the enclosing request or candidate
        stage: Pipeline stage index (one of the STAGE_* constants)
        index: Candidate or attempt index within the stage

    Returns:
        First 8 bytes of sha256("parent:stage:index") as an integer below 2**63
    """
    digest = hashlib.sha256(f"{parent}:{stage}:{index}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big") % SEED_MODULUS


def seeded_random(seed: int) -> random.Random:
    return random.Random(seed)
