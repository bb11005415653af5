"""Generate one chart record, enumerate reasoning chains on it, and show
how a chain executes step by step."""

import random

from chartchain import (
    DiscoveryConfig,
    GenConfig,
    describe_chain,
    discover,
    fallback_generate,
    serialize,
)


def main() -> None:
    spec = fallback_generate(GenConfig(), random.Random(7), "bar_multi")
    print("--- chart record ---")
    print(serialize(spec)[:400], "...\n")

    result = discover(spec, DiscoveryConfig(quotas={2: 2, 3: 2, 4: 2, 5: 1}),
                      random.Random(0))
    print(f"discovered {len(result.chains)} chains:")
    for chain in result.chains:
        answer = chain.final_answer.render()
        print(f"  len={chain.length}  {chain.signature}  ->  {answer}")

    longest = max(result.chains, key=lambda c: c.length)
    print("\n--- step-by-step execution of the longest chain ---")
    desc = describe_chain(spec, longest)
    for line in desc.lines:
        print(line)
    print("Final result:", desc.final_result)


if __name__ == "__main__":
    main()
