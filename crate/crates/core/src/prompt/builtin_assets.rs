// Generated list of the template assets shipped in `templates/`.

pub(crate) const BUILTIN: &[(&str, &str)] = &[
    ("VERSION", include_str!("../../templates/VERSION")),
    ("algorithmic_context_spp.txt", include_str!("../../templates/algorithmic_context_spp.txt")),
    ("algorithmic_context_upmp.txt", include_str!("../../templates/algorithmic_context_upmp.txt")),
    ("problem_context_spp.txt", include_str!("../../templates/problem_context_spp.txt")),
    ("problem_context_upmp.txt", include_str!("../../templates/problem_context_upmp.txt")),
    ("spp/a_ceoh/E1.txt", include_str!("../../templates/spp/a_ceoh/E1.txt")),
    ("spp/a_ceoh/E2.txt", include_str!("../../templates/spp/a_ceoh/E2.txt")),
    ("spp/a_ceoh/I1.txt", include_str!("../../templates/spp/a_ceoh/I1.txt")),
    ("spp/a_ceoh/M1.txt", include_str!("../../templates/spp/a_ceoh/M1.txt")),
    ("spp/a_ceoh/M2.txt", include_str!("../../templates/spp/a_ceoh/M2.txt")),
    ("spp/eoh/E1.txt", include_str!("../../templates/spp/eoh/E1.txt")),
    ("spp/eoh/E2.txt", include_str!("../../templates/spp/eoh/E2.txt")),
    ("spp/eoh/I1.txt", include_str!("../../templates/spp/eoh/I1.txt")),
    ("spp/eoh/M1.txt", include_str!("../../templates/spp/eoh/M1.txt")),
    ("spp/eoh/M2.txt", include_str!("../../templates/spp/eoh/M2.txt")),
    ("spp/p_ceoh/E1.txt", include_str!("../../templates/spp/p_ceoh/E1.txt")),
    ("spp/p_ceoh/E2.txt", include_str!("../../templates/spp/p_ceoh/E2.txt")),
    ("spp/p_ceoh/I1.txt", include_str!("../../templates/spp/p_ceoh/I1.txt")),
    ("spp/p_ceoh/M1.txt", include_str!("../../templates/spp/p_ceoh/M1.txt")),
    ("spp/p_ceoh/M2.txt", include_str!("../../templates/spp/p_ceoh/M2.txt")),
    ("spp/pa_ceoh/E1.txt", include_str!("../../templates/spp/pa_ceoh/E1.txt")),
    ("spp/pa_ceoh/E2.txt", include_str!("../../templates/spp/pa_ceoh/E2.txt")),
    ("spp/pa_ceoh/I1.txt", include_str!("../../templates/spp/pa_ceoh/I1.txt")),
    ("spp/pa_ceoh/M1.txt", include_str!("../../templates/spp/pa_ceoh/M1.txt")),
    ("spp/pa_ceoh/M2.txt", include_str!("../../templates/spp/pa_ceoh/M2.txt")),
    ("upmp/a_ceoh/E1.txt", include_str!("../../templates/upmp/a_ceoh/E1.txt")),
    ("upmp/a_ceoh/E2.txt", include_str!("../../templates/upmp/a_ceoh/E2.txt")),
    ("upmp/a_ceoh/I1.txt", include_str!("../../templates/upmp/a_ceoh/I1.txt")),
    ("upmp/a_ceoh/M1.txt", include_str!("../../templates/upmp/a_ceoh/M1.txt")),
    ("upmp/a_ceoh/M2.txt", include_str!("../../templates/upmp/a_ceoh/M2.txt")),
    ("upmp/eoh/E1.txt", include_str!("../../templates/upmp/eoh/E1.txt")),
    ("upmp/eoh/E2.txt", include_str!("../../templates/upmp/eoh/E2.txt")),
    ("upmp/eoh/I1.txt", include_str!("../../templates/upmp/eoh/I1.txt")),
    ("upmp/eoh/M1.txt", include_str!("../../templates/upmp/eoh/M1.txt")),
    ("upmp/eoh/M2.txt", include_str!("../../templates/upmp/eoh/M2.txt")),
    ("upmp/p_ceoh/E1.txt", include_str!("../../templates/upmp/p_ceoh/E1.txt")),
    ("upmp/p_ceoh/E2.txt", include_str!("../../templates/upmp/p_ceoh/E2.txt")),
    ("upmp/p_ceoh/I1.txt", include_str!("../../templates/upmp/p_ceoh/I1.txt")),
    ("upmp/p_ceoh/M1.txt", include_str!("../../templates/upmp/p_ceoh/M1.txt")),
    ("upmp/p_ceoh/M2.txt", include_str!("../../templates/upmp/p_ceoh/M2.txt")),
    ("upmp/pa_ceoh/E1.txt", include_str!("../../templates/upmp/pa_ceoh/E1.txt")),
    ("upmp/pa_ceoh/E2.txt", include_str!("../../templates/upmp/pa_ceoh/E2.txt")),
    ("upmp/pa_ceoh/I1.txt", include_str!("../../templates/upmp/pa_ceoh/I1.txt")),
    ("upmp/pa_ceoh/M1.txt", include_str!("../../templates/upmp/pa_ceoh/M1.txt")),
    ("upmp/pa_ceoh/M2.txt", include_str!("../../templates/upmp/pa_ceoh/M2.txt")),
];
