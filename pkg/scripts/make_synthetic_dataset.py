"""Write a synthetic trial tree that the ``limbeeg extract`` stage can read."""
import argparse

from limbeeg.synthetic import SyntheticSpec, write_synthetic_dataset


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("out", help="directory to create")
    p.add_argument("--subjects", type=int, default=24)
    p.add_argument("--baseline-per-subject", type=int, default=4)
    p.add_argument("--alpha-gain", type=float, default=1.5,
                   help="burst amplitude relative to the noise SD")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    spec = SyntheticSpec(n_subjects=args.subjects, baseline_per_subject=args.baseline_per_subject,
                         alpha_gain=args.alpha_gain, seed=args.seed)
    paths = write_synthetic_dataset(args.out, spec)
    print(f"wrote {len(paths)} trial files under {args.out}")


if __name__ == "__main__":
    main()
