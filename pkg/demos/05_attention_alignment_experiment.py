"""Attention alignment on the synthetic corpus: base vs finetune vs aligned.

The toy model answers "is the <fruit> ripe?" by attending over scene
regions. Plain finetuning on (main, sub) pairs improves answers without
constraining where the model looks; the alignment loss additionally pulls
the main question's attention onto the sub-question's attention and scores
the main answer through it. The held-out report shows the aligned variant
matching or beating finetuning on attention correlation while keeping
consistency above the untouched base model.

Run: python3 demos/05_attention_alignment_experiment.py   (about a minute)
"""

from squint.lab.experiment import ExperimentConfig, run_experiment
from squint.lab.train import TrainConfig


def main() -> None:
    config = ExperimentConfig(train=TrainConfig(lr=1.0, epochs=120, seed=0))
    print("training base, finetune, and aligned variants (seed 0)...")
    result = run_experiment(config)

    header = f"{'variant':10s} {'consistency %':>14s} {'reasoning %':>12s} {'attn corr':>10s}"
    print("\nHeld-out results:")
    print(header)
    print("-" * len(header))
    for name in ("base", "finetune", "squint"):
        r = result.reports[name]
        corr = "n/a" if r.attn_corr_mean is None else f"{r.attn_corr_mean:.4f}"
        print(f"{name:10s} {r.consistency_pct:14.2f} {r.reasoning_accuracy_pct:12.2f} {corr:>10s}")

    print("\nFinal training losses:")
    for name in ("finetune", "squint"):
        last = result.logs[name][-1]
        print(f"  {name}: total {last['loss_total']:.4f}  "
              f"(mse {last['loss_mse']:.4f}, bce_main {last['loss_bce_main']:.4f}, "
              f"bce_sub {last['loss_bce_sub']:.4f})")


if __name__ == "__main__":
    main()
