"""Regenerates the FCIDUMP fixtures under tests/fixtures with PySCF.

Run from the repository root:  python3 scripts/make_fixtures.py
"""
from pyscf import gto, scf, fci, tools, mcscf

def h2(bond, name):
    mol = gto.M(atom=f"H 0 0 0; H 0 0 {bond}", basis="sto-3g", unit="Angstrom")
    mf = scf.RHF(mol).run(verbose=0)
    tools.fcidump.from_scf(mf, f"tests/fixtures/{name}.fcidump", tol=1e-14)
    e = fci.FCI(mf).kernel()[0]
    print(name, "E_HF", mf.e_tot, "E_FCI", e)

h2(0.7414, "h2_sto3g_0.7414")
h2(1.0, "h2_sto3g_1.0")
h2(1.5, "h2_sto3g_1.5")
h2(2.5, "h2_sto3g_2.5")

# LiH/STO-3G: 6 orbitals, 4 electrons; lets the folding path run on real integrals.
mol = gto.M(atom="Li 0 0 0; H 0 0 1.5949", basis="sto-3g", unit="Angstrom")
mf = scf.RHF(mol).run(verbose=0)
tools.fcidump.from_scf(mf, "tests/fixtures/lih_sto3g.fcidump", tol=1e-14)
cas = mcscf.CASCI(mf, 3, 2).run(verbose=0)
print("lih E_HF", mf.e_tot, "E_FCI", fci.FCI(mf).kernel()[0], "CASCI(2,3)", cas.e_tot)
