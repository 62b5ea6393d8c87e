"""Deterministic synthetic stand-ins shaped like the four benchmark datasets.

Each generator emits a DataFrame with exactly the columns its schema preset
expects, at the documented row count, with a planted group-dependent label
structure so that fairness gaps, model accuracy, and mitigation all behave
like they do on the real tables.  Content is fixed by a per-dataset seed, so
the emitted CSV bytes are reproducible.
"""

from __future__ import annotations

import numpy as np
import pandas as pd

DEFAULT_SIZES = {"german": 1000, "compas": 5875, "adult": 45222, "bank": 41188}
_BASE_SEEDS = {"german": 101, "compas": 202, "adult": 303, "bank": 404}


def available():
    return sorted(DEFAULT_SIZES)


def _std(x):
    x = np.asarray(x, dtype=float)
    sd = x.std()
    return (x - x.mean()) / sd if sd > 0 else x - x.mean()


def _label_from_score(score, rate, rng, noise=1.0):
    """Binary label hitting ``rate`` positives overall, noisy around a latent score."""
    z = score + rng.normal(0.0, noise, len(score))
    return (z > np.quantile(z, 1.0 - rate)).astype(int)


def _german(n, rng):
    sex = rng.choice(["male", "female"], size=n, p=[0.69, 0.31])
    age = np.clip(rng.normal(35, 11, n), 19, 75).round().astype(int)
    duration = np.clip(rng.lognormal(2.9, 0.55, n), 4, 72).round().astype(int)
    credit_amount = np.clip(rng.lognormal(7.8, 0.75, n), 250, 20000).round().astype(int)
    installment_rate = rng.integers(1, 5, n)
    residence_since = rng.integers(1, 5, n)
    existing_credits = rng.choice([1, 2, 3, 4], size=n, p=[0.63, 0.31, 0.04, 0.02])
    checking_status = rng.choice(
        ["no_account", "lt_0", "0_to_200", "ge_200"], size=n, p=[0.39, 0.27, 0.27, 0.07])
    credit_history = rng.choice(
        ["critical", "delay", "existing_paid", "all_paid", "no_credits"],
        size=n, p=[0.29, 0.09, 0.53, 0.05, 0.04])
    purpose = rng.choice(
        ["radio_tv", "new_car", "furniture", "used_car", "business",
         "education", "repairs", "other"],
        size=n, p=[0.28, 0.23, 0.18, 0.10, 0.10, 0.05, 0.03, 0.03])
    savings = rng.choice(
        ["lt_100", "100_to_500", "500_to_1000", "ge_1000", "unknown"],
        size=n, p=[0.60, 0.10, 0.06, 0.05, 0.19])
    employment = rng.choice(
        ["unemployed", "lt_1y", "1_to_4y", "4_to_7y", "ge_7y"],
        size=n, p=[0.06, 0.17, 0.34, 0.17, 0.26])
    housing = rng.choice(["own", "rent", "free"], size=n, p=[0.71, 0.18, 0.11])
    job = rng.choice(
        ["unskilled", "skilled", "management", "unemployed_nonres"],
        size=n, p=[0.20, 0.63, 0.15, 0.02])
    foreign_worker = rng.choice(["yes", "no"], size=n, p=[0.96, 0.04])

    checking_effect = pd.Series(checking_status).map(
        {"no_account": 0.55, "ge_200": 0.35, "0_to_200": 0.0, "lt_0": -0.45}).to_numpy()
    savings_effect = pd.Series(savings).map(
        {"lt_100": -0.25, "100_to_500": 0.0, "500_to_1000": 0.15,
         "ge_1000": 0.35, "unknown": 0.10}).to_numpy()
    history_effect = pd.Series(credit_history).map(
        {"critical": 0.30, "existing_paid": 0.10, "delay": -0.15,
         "all_paid": -0.25, "no_credits": -0.30}).to_numpy()
    score = (
        -0.65 * _std(duration)
        - 0.45 * _std(np.log(credit_amount))
        + 0.25 * _std(age)
        + checking_effect + savings_effect + history_effect
        + 0.55 * (sex == "male")
    )
    good = _label_from_score(score, 0.70, rng)
    return pd.DataFrame({
        "checking_status": checking_status,
        "duration": duration,
        "credit_history": credit_history,
        "purpose": purpose,
        "credit_amount": credit_amount,
        "savings": savings,
        "employment": employment,
        "installment_rate": installment_rate,
        "sex": sex,
        "residence_since": residence_since,
        "age": age,
        "housing": housing,
        "existing_credits": existing_credits,
        "job": job,
        "foreign_worker": foreign_worker,
        "credit": np.where(good == 1, "good", "bad"),
    })


def _compas(n, rng):
    race = rng.choice(["African-American", "Caucasian"], size=n, p=[0.61, 0.39])
    sex = rng.choice(["Male", "Female"], size=n, p=[0.81, 0.19])
    age = np.clip(rng.gamma(4.2, 8.0, n) + 18, 18, 83).round().astype(int)
    juv_fel_count = rng.poisson(0.06, n)
    juv_misd_count = rng.poisson(0.09, n)
    priors_count = np.minimum(rng.poisson(rng.gamma(1.1, 2.6, n)), 38)
    c_charge_degree = rng.choice(["F", "M"], size=n, p=[0.64, 0.36])

    score = (
        0.85 * _std(priors_count)
        - 0.50 * _std(age)
        + 0.30 * _std(juv_fel_count + juv_misd_count)
        + 0.20 * (c_charge_degree == "F")
        + 0.15 * (sex == "Male")
        + 0.40 * (race == "African-American")
    )
    recid = _label_from_score(score, 0.46, rng)
    return pd.DataFrame({
        "sex": sex,
        "age": age,
        "race": race,
        "juv_fel_count": juv_fel_count,
        "juv_misd_count": juv_misd_count,
        "priors_count": priors_count,
        "c_charge_degree": c_charge_degree,
        "two_year_recid": recid,
    })


def _adult(n, rng):
    sex = rng.choice(["Male", "Female"], size=n, p=[0.675, 0.325])
    age = np.clip(rng.gamma(6.0, 6.4, n) + 17, 17, 90).round().astype(int)
    education = rng.choice(
        ["HS-grad", "Some-college", "Bachelors", "Masters", "Assoc",
         "11th", "10th", "Doctorate"],
        size=n, p=[0.33, 0.22, 0.16, 0.06, 0.07, 0.06, 0.05, 0.05])
    education_num = pd.Series(education).map(
        {"10th": 6, "11th": 7, "HS-grad": 9, "Some-college": 10,
         "Assoc": 11, "Bachelors": 13, "Masters": 14, "Doctorate": 16}).to_numpy()
    workclass = rng.choice(
        ["Private", "Self-emp", "Government", "Other"],
        size=n, p=[0.74, 0.11, 0.13, 0.02])
    marital_status = rng.choice(
        ["Married", "Never-married", "Divorced", "Separated", "Widowed"],
        size=n, p=[0.47, 0.32, 0.14, 0.03, 0.04])
    occupation = rng.choice(
        ["Craft-repair", "Prof-specialty", "Exec-managerial", "Adm-clerical",
         "Sales", "Other-service", "Machine-op", "Transport"],
        size=n, p=[0.13, 0.14, 0.13, 0.12, 0.11, 0.11, 0.13, 0.13])
    relationship = rng.choice(
        ["Husband", "Not-in-family", "Own-child", "Unmarried", "Wife", "Other"],
        size=n, p=[0.40, 0.26, 0.15, 0.10, 0.05, 0.04])
    race = rng.choice(
        ["White", "Black", "Asian-Pac-Islander", "Amer-Indian-Eskimo", "Other"],
        size=n, p=[0.86, 0.09, 0.03, 0.01, 0.01])
    native_country = rng.choice(
        ["United-States", "Mexico", "Philippines", "Germany", "Other"],
        size=n, p=[0.90, 0.03, 0.01, 0.01, 0.05])
    fnlwgt = rng.lognormal(12.0, 0.45, n).round().astype(int)
    capital_gain = np.where(rng.random(n) < 0.08,
                            rng.lognormal(8.5, 1.0, n), 0.0).round().astype(int)
    capital_loss = np.where(rng.random(n) < 0.05,
                            rng.lognormal(7.4, 0.4, n), 0.0).round().astype(int)
    hours_per_week = np.clip(rng.normal(40, 12, n), 1, 99).round().astype(int)

    score = (
        0.95 * _std(education_num)
        + 0.45 * _std(age)
        + 0.40 * _std(hours_per_week)
        + 0.45 * (capital_gain > 0)
        + 0.50 * (marital_status == "Married")
        + 0.70 * (sex == "Male")
    )
    high = _label_from_score(score, 0.248, rng)
    return pd.DataFrame({
        "age": age,
        "workclass": workclass,
        "fnlwgt": fnlwgt,
        "education": education,
        "education_num": education_num,
        "marital_status": marital_status,
        "occupation": occupation,
        "relationship": relationship,
        "race": race,
        "sex": sex,
        "capital_gain": capital_gain,
        "capital_loss": capital_loss,
        "hours_per_week": hours_per_week,
        "native_country": native_country,
        "income": np.where(high == 1, ">50K", "<=50K"),
    })


def _bank(n, rng):
    age = np.clip(rng.gamma(4.0, 6.0, n) + 17, 17, 98).round().astype(int)
    age_group = np.where(age >= 25, "25_or_older", "under_25")
    job = rng.choice(
        ["admin", "blue-collar", "technician", "services", "management",
         "retired", "self-employed", "student"],
        size=n, p=[0.25, 0.22, 0.16, 0.10, 0.07, 0.05, 0.04, 0.11])
    marital = rng.choice(["married", "single", "divorced"], size=n, p=[0.61, 0.28, 0.11])
    education = rng.choice(
        ["basic", "high_school", "professional", "university", "unknown"],
        size=n, p=[0.29, 0.23, 0.13, 0.30, 0.05])
    default = rng.choice(["no", "unknown"], size=n, p=[0.79, 0.21])
    housing = rng.choice(["yes", "no"], size=n, p=[0.54, 0.46])
    loan = rng.choice(["no", "yes"], size=n, p=[0.84, 0.16])
    contact = rng.choice(["cellular", "telephone"], size=n, p=[0.63, 0.37])
    month = rng.choice(
        ["may", "jul", "aug", "jun", "nov", "apr", "oct", "sep", "mar", "dec"],
        size=n, p=[0.33, 0.17, 0.15, 0.13, 0.10, 0.07, 0.02, 0.014, 0.013, 0.003])
    campaign = np.minimum(rng.geometric(0.38, n), 20)
    previous = np.minimum(rng.poisson(0.17, n), 6)
    poutcome = np.where(previous == 0, "nonexistent",
                        rng.choice(["failure", "success"], size=n, p=[0.75, 0.25]))
    emp_var_rate = rng.choice([-3.4, -1.8, -0.1, 1.1, 1.4], size=n,
                              p=[0.03, 0.22, 0.09, 0.19, 0.47])

    score = (
        0.85 * (poutcome == "success")
        - 0.55 * _std(emp_var_rate)
        - 0.25 * _std(campaign)
        + 0.35 * (contact == "cellular")
        + 0.25 * (job == "retired") + 0.25 * (job == "student")
        - 0.30 * (age_group == "25_or_older")
    )
    yes = _label_from_score(score, 0.113, rng)
    return pd.DataFrame({
        "age": age,
        "age_group": age_group,
        "job": job,
        "marital": marital,
        "education": education,
        "default": default,
        "housing": housing,
        "loan": loan,
        "contact": contact,
        "month": month,
        "campaign": campaign,
        "previous": previous,
        "poutcome": poutcome,
        "emp_var_rate": emp_var_rate,
        "subscribed": np.where(yes == 1, "yes", "no"),
    })


_BUILDERS = {"german": _german, "compas": _compas, "adult": _adult, "bank": _bank}


def generate(name: str, n: int | None = None, seed: int | None = None) -> pd.DataFrame:
    """Build the named synthetic stand-in; fixed content unless overridden."""
    if name not in _BUILDERS:
        raise ValueError(f"unknown synthetic dataset {name!r}; choose from {available()}")
    if n is None:
        n = DEFAULT_SIZES[name]
    if seed is None:
        seed = _BASE_SEEDS[name]
    rng = np.random.default_rng(seed)
    return _BUILDERS[name](int(n), rng)


def write_csv(df: pd.DataFrame, path) -> None:
    df.to_csv(path, index=False)
