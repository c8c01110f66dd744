#include "micon/dataset.hpp"

namespace micon::data {

// 256 distinct drug-like structures used to label synthetic compounds.
// Regenerate with scripts/make_smiles_pool.py.
const std::vector<std::string>& smiles_pool() {
    static const std::vector<std::string> pool = {
        "CC(=O)Oc1ccccc1C(=O)O",
        "CC(=O)Nc1ccc(O)cc1",
        "Cn1cnc2c1c(=O)n(C)c(=O)n2C",
        "CC(C)Cc1ccc(C(C)C(=O)O)cc1",
        "COc1ccc2cc(C(C)C(=O)O)ccc2c1",
        "CN1CCCC1c1cccnc1",
        "CCOC(=O)c1ccc(N)cc1",
        "CC(C)(C)NCC(O)c1ccc(O)c(CO)c1",
        "CN1C(=O)CN=C(c2ccccc2)c2cc(Cl)ccc21",
        "CCC1(c2ccccc2)C(=O)NC(=O)NC1=O",
        "CCN(CC)CCOC(=O)c1ccc(N)cc1",
        "CCN(CC)CC(=O)Nc1c(C)cccc1C",
        "CC(=O)CC(c1ccccc1)c1c(O)c2ccccc2oc1=O",
        "CN(C)C(=N)NC(=N)N",
        "Nc1ccc(S(N)(=O)=O)cc1",
        "CCN(CC)CCCC(C)Nc1ccnc2cc(Cl)ccc12",
        "NS(=O)(=O)c1cc(C(=O)O)c(NCc2ccco2)cc1Cl",
        "O=C(O)c1cn(C2CC2)c2cc(N3CCNCC3)c(F)cc2c1=O",
        "CC(C)NCC(O)COc1ccc(CC(N)=O)cc1",
        "Cn1c(=O)c2[nH]cnc2n(C)c1=O",
        "NCCc1c[nH]c2ccc(O)cc12",
        "NCCc1ccc(O)c(O)c1",
        "Nc1ccccc1",
        "CC1(C)SC2C(NC(=O)Cc3ccccc3)C(=O)N2C1C(=O)O",
        "CC(=O)Nc1nnc(S(N)(=O)=O)s1",
        "NNC(=O)c1ccncc1",
        "Cc1ncc([N+](=O)[O-])n1CCO",
        "c1ccc(C)cc1",
        "c1ccc(CC)cc1",
        "c1ccc(CCC)cc1",
        "c1ccc(C(C)C)cc1",
        "c1ccc(C(C)(C)C)cc1",
        "c1ccc(O)cc1",
        "c1ccc(OC)cc1",
        "c1ccc(OCC)cc1",
        "c1ccc(NC)cc1",
        "c1ccc(N(C)C)cc1",
        "c1ccc(F)cc1",
        "c1ccc(Cl)cc1",
        "c1ccc(Br)cc1",
        "c1ccc(C#N)cc1",
        "c1ccc(C(=O)O)cc1",
        "c1ccc(C(=O)OC)cc1",
        "c1ccc(C(=O)N)cc1",
        "c1ccc(C(F)(F)F)cc1",
        "c1ccc(S(=O)(=O)N)cc1",
        "c1ccc(CO)cc1",
        "c1ccc(CCO)cc1",
        "c1ccc(CC(=O)O)cc1",
        "c1ccc(C=C)cc1",
        "c1ccc(C(=O)C)cc1",
        "c1ccc(NCC)cc1",
        "c1ccc(OC(C)C)cc1",
        "c1ccc(CN)cc1",
        "c1ccc(CCN)cc1",
        "c1ccc(SC)cc1",
        "c1ccc2ccccc2c1C",
        "c1ccc2ccccc2c1CC",
        "c1ccc2ccccc2c1CCC",
        "c1ccc2ccccc2c1C(C)C",
        "c1ccc2ccccc2c1C(C)(C)C",
        "c1ccc2ccccc2c1O",
        "c1ccc2ccccc2c1OC",
        "c1ccc2ccccc2c1OCC",
        "c1ccc2ccccc2c1N",
        "c1ccc2ccccc2c1NC",
        "c1ccc2ccccc2c1N(C)C",
        "c1ccc2ccccc2c1F",
        "c1ccc2ccccc2c1Cl",
        "c1ccc2ccccc2c1Br",
        "c1ccc2ccccc2c1C#N",
        "c1ccc2ccccc2c1C(=O)O",
        "c1ccc2ccccc2c1C(=O)OC",
        "c1ccc2ccccc2c1C(=O)N",
        "c1ccc2ccccc2c1C(F)(F)F",
        "c1ccc2ccccc2c1S(=O)(=O)N",
        "c1ccc2ccccc2c1CO",
        "c1ccc2ccccc2c1CCO",
        "c1ccc2ccccc2c1CC(=O)O",
        "c1ccc2ccccc2c1C=C",
        "c1ccc2ccccc2c1C(=O)C",
        "c1ccc2ccccc2c1NCC",
        "c1ccc2ccccc2c1OC(C)C",
        "c1ccc2ccccc2c1CN",
        "c1ccc2ccccc2c1CCN",
        "c1ccc2ccccc2c1SC",
        "c1ccnc(C)c1",
        "c1ccnc(CC)c1",
        "c1ccnc(CCC)c1",
        "c1ccnc(C(C)C)c1",
        "c1ccnc(C(C)(C)C)c1",
        "c1ccnc(O)c1",
        "c1ccnc(OC)c1",
        "c1ccnc(OCC)c1",
        "c1ccnc(N)c1",
        "c1ccnc(NC)c1",
        "c1ccnc(N(C)C)c1",
        "c1ccnc(F)c1",
        "c1ccnc(Cl)c1",
        "c1ccnc(Br)c1",
        "c1ccnc(C#N)c1",
        "c1ccnc(C(=O)O)c1",
        "c1ccnc(C(=O)OC)c1",
        "c1ccnc(C(=O)N)c1",
        "c1ccnc(C(F)(F)F)c1",
        "c1ccnc(S(=O)(=O)N)c1",
        "c1ccnc(CO)c1",
        "c1ccnc(CCO)c1",
        "c1ccnc(CC(=O)O)c1",
        "c1ccnc(C=C)c1",
        "c1ccnc(C(=O)C)c1",
        "c1ccnc(NCC)c1",
        "c1ccnc(OC(C)C)c1",
        "c1ccnc(CN)c1",
        "c1ccnc(CCN)c1",
        "c1ccnc(SC)c1",
        "c1cnc(C)nc1",
        "c1cnc(CC)nc1",
        "c1cnc(CCC)nc1",
        "c1cnc(C(C)C)nc1",
        "c1cnc(C(C)(C)C)nc1",
        "c1cnc(O)nc1",
        "c1cnc(OC)nc1",
        "c1cnc(OCC)nc1",
        "c1cnc(N)nc1",
        "c1cnc(NC)nc1",
        "c1cnc(N(C)C)nc1",
        "c1cnc(F)nc1",
        "c1cnc(Cl)nc1",
        "c1cnc(Br)nc1",
        "c1cnc(C#N)nc1",
        "c1cnc(C(=O)O)nc1",
        "c1cnc(C(=O)OC)nc1",
        "c1cnc(C(=O)N)nc1",
        "c1cnc(C(F)(F)F)nc1",
        "c1cnc(S(=O)(=O)N)nc1",
        "c1cnc(CO)nc1",
        "c1cnc(CCO)nc1",
        "c1cnc(CC(=O)O)nc1",
        "c1cnc(C=C)nc1",
        "c1cnc(C(=O)C)nc1",
        "c1cnc(NCC)nc1",
        "c1cnc(OC(C)C)nc1",
        "c1cnc(CN)nc1",
        "c1cnc(CCN)nc1",
        "c1cnc(SC)nc1",
        "c1ccc2[nH]c(C)cc2c1",
        "c1ccc2[nH]c(CC)cc2c1",
        "c1ccc2[nH]c(CCC)cc2c1",
        "c1ccc2[nH]c(C(C)C)cc2c1",
        "c1ccc2[nH]c(C(C)(C)C)cc2c1",
        "c1ccc2[nH]c(O)cc2c1",
        "c1ccc2[nH]c(OC)cc2c1",
        "c1ccc2[nH]c(OCC)cc2c1",
        "c1ccc2[nH]c(N)cc2c1",
        "c1ccc2[nH]c(NC)cc2c1",
        "c1ccc2[nH]c(N(C)C)cc2c1",
        "c1ccc2[nH]c(F)cc2c1",
        "c1ccc2[nH]c(Cl)cc2c1",
        "c1ccc2[nH]c(Br)cc2c1",
        "c1ccc2[nH]c(C#N)cc2c1",
        "c1ccc2[nH]c(C(=O)O)cc2c1",
        "c1ccc2[nH]c(C(=O)OC)cc2c1",
        "c1ccc2[nH]c(C(=O)N)cc2c1",
        "c1ccc2[nH]c(C(F)(F)F)cc2c1",
        "c1ccc2[nH]c(S(=O)(=O)N)cc2c1",
        "c1ccc2[nH]c(CO)cc2c1",
        "c1ccc2[nH]c(CCO)cc2c1",
        "c1ccc2[nH]c(CC(=O)O)cc2c1",
        "c1ccc2[nH]c(C=C)cc2c1",
        "c1ccc2[nH]c(C(=O)C)cc2c1",
        "c1ccc2[nH]c(NCC)cc2c1",
        "c1ccc2[nH]c(OC(C)C)cc2c1",
        "c1ccc2[nH]c(CN)cc2c1",
        "c1ccc2[nH]c(CCN)cc2c1",
        "c1ccc2[nH]c(SC)cc2c1",
        "c1ccc2oc(C)cc2c1",
        "c1ccc2oc(CC)cc2c1",
        "c1ccc2oc(CCC)cc2c1",
        "c1ccc2oc(C(C)C)cc2c1",
        "c1ccc2oc(C(C)(C)C)cc2c1",
        "c1ccc2oc(O)cc2c1",
        "c1ccc2oc(OC)cc2c1",
        "c1ccc2oc(OCC)cc2c1",
        "c1ccc2oc(N)cc2c1",
        "c1ccc2oc(NC)cc2c1",
        "c1ccc2oc(N(C)C)cc2c1",
        "c1ccc2oc(F)cc2c1",
        "c1ccc2oc(Cl)cc2c1",
        "c1ccc2oc(Br)cc2c1",
        "c1ccc2oc(C#N)cc2c1",
        "c1ccc2oc(C(=O)O)cc2c1",
        "c1ccc2oc(C(=O)OC)cc2c1",
        "c1ccc2oc(C(=O)N)cc2c1",
        "c1ccc2oc(C(F)(F)F)cc2c1",
        "c1ccc2oc(S(=O)(=O)N)cc2c1",
        "c1ccc2oc(CO)cc2c1",
        "c1ccc2oc(CCO)cc2c1",
        "c1ccc2oc(CC(=O)O)cc2c1",
        "c1ccc2oc(C=C)cc2c1",
        "c1ccc2oc(C(=O)C)cc2c1",
        "c1ccc2oc(NCC)cc2c1",
        "c1ccc2oc(OC(C)C)cc2c1",
        "c1ccc2oc(CN)cc2c1",
        "c1ccc2oc(CCN)cc2c1",
        "c1ccc2oc(SC)cc2c1",
        "c1ccc2sc(C)cc2c1",
        "c1ccc2sc(CC)cc2c1",
        "c1ccc2sc(CCC)cc2c1",
        "c1ccc2sc(C(C)C)cc2c1",
        "c1ccc2sc(C(C)(C)C)cc2c1",
        "c1ccc2sc(O)cc2c1",
        "c1ccc2sc(OC)cc2c1",
        "c1ccc2sc(OCC)cc2c1",
        "c1ccc2sc(N)cc2c1",
        "c1ccc2sc(NC)cc2c1",
        "c1ccc2sc(N(C)C)cc2c1",
        "c1ccc2sc(F)cc2c1",
        "c1ccc2sc(Cl)cc2c1",
        "c1ccc2sc(Br)cc2c1",
        "c1ccc2sc(C#N)cc2c1",
        "c1ccc2sc(C(=O)O)cc2c1",
        "c1ccc2sc(C(=O)OC)cc2c1",
        "c1ccc2sc(C(=O)N)cc2c1",
        "c1ccc2sc(C(F)(F)F)cc2c1",
        "c1ccc2sc(S(=O)(=O)N)cc2c1",
        "c1ccc2sc(CO)cc2c1",
        "c1ccc2sc(CCO)cc2c1",
        "c1ccc2sc(CC(=O)O)cc2c1",
        "c1ccc2sc(C=C)cc2c1",
        "c1ccc2sc(C(=O)C)cc2c1",
        "c1ccc2sc(NCC)cc2c1",
        "c1ccc2sc(OC(C)C)cc2c1",
        "c1ccc2sc(CN)cc2c1",
        "c1ccc2sc(CCN)cc2c1",
        "c1ccc2sc(SC)cc2c1",
        "c1ccc2nc(C)ccc2c1",
        "c1ccc2nc(CC)ccc2c1",
        "c1ccc2nc(CCC)ccc2c1",
        "c1ccc2nc(C(C)C)ccc2c1",
        "c1ccc2nc(C(C)(C)C)ccc2c1",
        "c1ccc2nc(O)ccc2c1",
        "c1ccc2nc(OC)ccc2c1",
        "c1ccc2nc(OCC)ccc2c1",
        "c1ccc2nc(N)ccc2c1",
        "c1ccc2nc(NC)ccc2c1",
        "c1ccc2nc(N(C)C)ccc2c1",
        "c1ccc2nc(F)ccc2c1",
        "c1ccc2nc(Cl)ccc2c1",
        "c1ccc2nc(Br)ccc2c1",
        "c1ccc2nc(C#N)ccc2c1",
        "c1ccc2nc(C(=O)O)ccc2c1",
        "c1ccc2nc(C(=O)OC)ccc2c1",
        "c1ccc2nc(C(=O)N)ccc2c1",
        "c1ccc2nc(C(F)(F)F)ccc2c1",
        "c1ccc2nc(S(=O)(=O)N)ccc2c1",
    };
    return pool;
}

}  // namespace micon::data
