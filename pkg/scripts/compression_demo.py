"""Rejection-sampling compression on a handful of small one-way protocols.

For each protocol: measured I_s^beta, candidate budget K, communication in
bits against c + log(2/beta) + loglog(2/beta), and success before/after.

    python3 scripts/compression_demo.py --beta 0.05
"""

import argparse

from qiadv.compression import (
    compress,
    evaluate_success,
    noisy_copy_protocol,
    one_way_from_strategy,
    parity_hint_protocol,
)
from qiadv.game import GameSpec
from qiadv.info import ispec_smoothed
from qiadv.provers import ConstantZero, PrefixLeak, RandomHash


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--beta", type=float, default=0.05)
    parser.add_argument("--seeds", type=int, default=5000)
    args = parser.parse_args()

    protocols = [
        one_way_from_strategy(PrefixLeak(2), GameSpec(4, 4)),
        one_way_from_strategy(RandomHash(2, family_size=4), GameSpec(4, 3)),
        one_way_from_strategy(ConstantZero(), GameSpec(3, 2)),
        noisy_copy_protocol(8, 0.3),
        parity_hint_protocol(3, 0.1),
    ]
    print(f"{'protocol':<36} {'c':>6} {'K':>6} {'bits':>5} {'stated':>7} {'orig':>7} {'exact':>7} {'mc':>7} {'se':>7}")
    for proto in protocols:
        c = ispec_smoothed(proto.joint(), args.beta)
        comp = compress(proto, c, args.beta)
        exact = evaluate_success(comp).value
        mc = evaluate_success(comp, "monte-carlo", seeds=args.seeds)
        print(f"{proto.name:<36} {c:>6.3f} {comp.K:>6} {comp.communication_bits:>5} {comp.stated_bound_bits:>7.2f} "
              f"{proto.success():>7.4f} {exact:>7.4f} {mc.value:>7.4f} {mc.se:>7.4f}")


if __name__ == "__main__":
    main()
