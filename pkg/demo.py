"""Quick demo script showing clean output."""
import logging

# Disable logging for clean output
logging.disable(logging.CRITICAL)

from src.schedule import QaoaParams, ScheduleSpec, SearchInstance, Variant, schedule_discrete, synth_qaoa_params
from src.simulator import Backend, run_qaoa, run_reference_adiabatic
from src.trotter import evolution_error


def main():
    print("=" * 70)
    print("AGS-QAOA - DEMO")
    print("=" * 70)

    # Grover equivalence
    print("\n1. ONE GROVER ITERATION (N = 4)")
    grover = QaoaParams(gamma=(3.141592653589793,), beta=(3.141592653589793,))
    for backend in Backend:
        result = run_qaoa(SearchInstance(n_qubits=2, marked=1), grover, backend)
        print(f"   {backend.value:12s} success_prob = {result.success_prob:.12f}")

    # Endpoint behaviour of the three variants
    print("\n2. SCHEDULE VARIANTS (N = 16, R = 4)")
    for variant in Variant:
        sched = schedule_discrete(ScheduleSpec(variant=variant, R=4), 16)
        values = ", ".join(f"{v:.4f}" for v in sched.s)
        flag = "  [!] leaves [0, 1]" if sched.out_of_range else ""
        print(f"   {variant.value:12s} s = [{values}]{flag}")

    # Synthesized angles at growing depth
    print("\n3. CLOSED-FORM ANGLES (n = 8, eps1 = 0.1)")
    instance = SearchInstance(n_qubits=8)
    print(f"   {'R':>6s} {'trotter_err':>12s} {'circuit':>9s} {'reference':>10s}")
    for R in (64, 256, 1024, 4096):
        sched = schedule_discrete(ScheduleSpec(R=R), instance.N)
        report = evolution_error(sched, 2)
        circuit = run_qaoa(instance, synth_qaoa_params(sched))
        reference = run_reference_adiabatic(instance, sched, refine=8)
        print(f"   {R:6d} {report.trotter_err:12.3e} {circuit.success_prob:9.5f} "
              f"{reference.success_prob:10.5f}")

    print("\n" + "=" * 70)
    print("Run 'ags-qaoa --help' for the full command set")


if __name__ == "__main__":
    main()
