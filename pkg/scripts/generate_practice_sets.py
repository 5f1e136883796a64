import os
import sys
import argparse
import logging

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))
from turtle_tasksyn.cli import REFERENCES_DIR, run

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)


def generate_practice_sets(env_name, out_dir, references_dir=REFERENCES_DIR, seed=0, render=True):
    """
    Run the deployment profile of the given environment over a reference suite.

    Args:
        env_name: Environment name ("dev" or "prod")
        out_dir: Root directory for the generated practice sets
        references_dir: Directory holding <name>.task.json / <name>.xlc pairs
        seed: Synthesis seed shared by every reference
        render: Also write an SVG next to each generated task

    Returns:
        The batch exit code (0 all quotas met, 2 some quota short, 1 input error)
    """
    argv = ["batch", "--env", env_name, "--references", references_dir,
            "--out", out_dir, "--seed", str(seed)]
    if render:
        argv.append("--render")
    logger.info(f"Generating practice sets for {env_name} into {out_dir}")
    exit_code = run(argv)
    if exit_code == 0:
        logger.info("All quotas met")
    else:
        logger.warning(f"Batch finished with exit code {exit_code}")
    return exit_code


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description='Generate practice sets for the bundled reference suite')
    parser.add_argument('--env', default='dev', choices=['dev', 'prod'], help='Environment (default: dev)')
    parser.add_argument('--out', default='practice_sets', help='Output root directory')
    parser.add_argument('--references', default=REFERENCES_DIR, help='Reference suite directory')
    parser.add_argument('--seed', type=int, default=0, help='Random seed (default: 0)')
    parser.add_argument('--no-render', action='store_true', help='Skip SVG rendering')
    args = parser.parse_args()

    sys.exit(generate_practice_sets(args.env, args.out, args.references, args.seed, not args.no_render))
