import pytest
from hypothesis import given
from hypothesis import strategies as st

from fuzzydiet.ga import DISEASE_TERMS
from fuzzydiet.nutrition import (
    DiseaseType,
    EnergyMode,
    NutrientTargets,
    NutritionError,
    PatientProfile,
    activity_factor,
    bmr,
    daily_energy,
    default_tables,
    stress_factor,
    targets_for,
    total_energy,
)

PATIENT = PatientProfile("male", 50, 165, 40)


def test_bmr_male_reference_patient():
    # 66 + 13.7*50 + 5*165 - 6.8*40
    assert bmr(PATIENT) == pytest.approx(1304.0, abs=1e-9)


def test_bmr_female():
    # 655 + 480 + 297 - 188
    assert bmr(PatientProfile("female", 50, 165, 40)) == pytest.approx(1244.0, abs=1e-9)


def test_bmr_unit_inputs():
    assert bmr(PatientProfile("male", 1, 1, 0)) == pytest.approx(84.7, abs=1e-12)


@pytest.mark.parametrize("kwargs", [dict(body_weight=0), dict(height=-1), dict(age=-0.5)])
def test_profile_validation(kwargs):
    base = dict(sex="male", body_weight=50, height=165, age=40)
    with pytest.raises(NutritionError):
        PatientProfile(**{**base, **kwargs})


def test_bmr_degenerate_is_domain_error():
    with pytest.raises(NutritionError):
        bmr(PatientProfile("male", 1, 1, 200))


@pytest.mark.parametrize("sex", ["male", "female"])
@pytest.mark.parametrize("field", ["body_weight", "height", "age"])
def test_bmr_slopes(sex, field):
    coef = {
        "male": {"body_weight": 13.7, "height": 5.0, "age": -6.8},
        "female": {"body_weight": 9.6, "height": 1.8, "age": -4.7},
    }[sex][field]
    base = dict(sex=sex, body_weight=60.0, height=160.0, age=30.0)
    h = 1.0
    lo = bmr(PatientProfile(**base))
    hi = bmr(PatientProfile(**{**base, field: base[field] + h}))
    assert (hi - lo) / h == pytest.approx(coef, abs=1e-9)


def test_total_energy_reference_patient():
    assert total_energy(1304.0, 1.2, 1.4) == pytest.approx(2190.72, abs=1e-9)
    assert total_energy(1000.0, 1.2, 1.3) == pytest.approx(1560.0, abs=1e-9)
    assert total_energy(1234.5, 1.0, 1.0) == 1234.5


@given(st.floats(1, 5000), st.floats(0.01, 100))
def test_total_energy_scales(amb, k):
    assert total_energy(amb * k, 1.2, 1.4) == pytest.approx(k * total_energy(amb, 1.2, 1.4), rel=1e-12)


def test_factor_tables():
    assert activity_factor("bed_rest") == 1.2
    assert activity_factor("ambulatory") == 1.3
    assert sorted(default_tables()["stress_factors"].values()) == [1.3, 1.4, 1.5, 1.6, 1.7, 2.1]
    assert stress_factor("minor") == 1.4
    with pytest.raises(NutritionError, match="unknown activity"):
        activity_factor("jogging")


def test_daily_energy_modes():
    assert daily_energy(PATIENT, "nephrotic_syndrome") == pytest.approx(2190.72)
    assert daily_energy(PATIENT, "acute_renal_failure", mode=EnergyMode.PER_KG) == pytest.approx(1500.0)
    assert daily_energy(PATIENT, "final_stage", mode="per-kg") == pytest.approx(1625.0)


def test_acute_targets():
    t = targets_for(DiseaseType.ACUTE_RENAL_FAILURE, PATIENT, 1500.0)
    assert t.p == 1500.0
    assert t.q == pytest.approx(40.0)
    assert t.r == pytest.approx(0.25 * 1500 / 9)
    assert t.r == pytest.approx(41.67, abs=0.005)
    assert t.present() == {"p", "q", "r"}


def test_chronic_potassium():
    t = targets_for(DiseaseType.CHRONIC_KIDNEY, PATIENT, 2000.0)
    assert t.t == pytest.approx(2150.5, abs=1e-9)
    assert t.q == pytest.approx(35.0)


def test_final_stage_minerals():
    t = targets_for(DiseaseType.FINAL_STAGE, PATIENT, 2000.0)
    assert t.v == 1000.0
    assert t.u == 1000.0
    assert t.q == pytest.approx(70.0)


def test_kidney_stone_targets():
    t = targets_for(DiseaseType.KIDNEY_STONE, PATIENT, 2000.0)
    assert t.w == pytest.approx(0.65 * 2000 / 4)
    assert t.r == pytest.approx(0.225 * 2000 / 9)
    assert t.u == pytest.approx(17 * 50)
    assert t.v == 1000.0


def test_nephrotic_targets():
    t = targets_for(DiseaseType.NEPHROTIC_SYNDROME, PATIENT, 2190.72)
    assert t.q == pytest.approx(50.0)
    assert t.r == pytest.approx(0.175 * 2190.72 / 9)
    assert t.s == 1000.0


@pytest.mark.parametrize("disease", list(DiseaseType))
def test_target_fields_match_fitness_terms(disease):
    t = targets_for(disease, PATIENT, 2000.0)
    assert t.present() == set(DISEASE_TERMS[disease])


@pytest.mark.parametrize("disease", list(DiseaseType))
@pytest.mark.parametrize("energy", [800.0, 2190.72, 3333.3])
def test_energy_share_conversions(disease, energy):
    tables = default_tables()
    rules = tables["diseases"][disease.value]
    conv = tables["conversions"]
    t = targets_for(disease, PATIENT, energy)
    assert t.r * conv["kcal_per_g_fat"] == pytest.approx(rules["fat_energy_fraction"] * energy, abs=1e-9)
    if t.w is not None:
        assert t.w * conv["kcal_per_g_carbohydrate"] == pytest.approx(
            rules["carbohydrate_energy_fraction"] * energy, abs=1e-9
        )


def test_five_diseases():
    assert len(DiseaseType) == 5


def test_targets_from_mapping():
    t = NutrientTargets.from_mapping({"p": 1500, "q": 40, "r": 41.67})
    assert t.as_dict() == {"p": 1500.0, "q": 40.0, "r": 41.67}
    with pytest.raises(NutritionError):
        NutrientTargets.from_mapping({"p": 1, "q": 1, "r": 1, "z": 3})
    with pytest.raises(NutritionError):
        NutrientTargets.from_mapping({"p": 1, "q": 1})
    with pytest.raises(NutritionError):
        NutrientTargets(p=1, q=1, r=0)


def test_nonpositive_energy():
    with pytest.raises(NutritionError):
        targets_for(DiseaseType.ACUTE_RENAL_FAILURE, PATIENT, 0.0)
