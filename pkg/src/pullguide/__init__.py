"""Mobile-manipulator guidance of a hand-held walker: leg tracking, adaptive
pulling with online impedance retuning, admittance-driven base motion and a
deterministic closed-loop simulator."""

__version__ = "0.1.0"
