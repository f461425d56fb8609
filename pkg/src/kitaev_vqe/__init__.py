"""Classical simulation and variational ground-state search for Kitaev spin models.

Fixed-gauge problems live on N/2 qubits (matter Majoranas only), dynamical-gauge
problems on 2N qubits (matter plus link fermions).  Exact references come from
the free-fermion canonical form and from exact diagonalisation.
"""
__version__ = "0.1.0"
