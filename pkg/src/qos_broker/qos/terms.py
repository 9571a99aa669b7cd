"""Qualitative terms: the selection checklist carried on offerings and SLA documents."""

import re
from collections.abc import Mapping

TermValue = bool | str

KNOWN_TERMS = {
    "data-export-supported": "Data can be imported into and exported from the service",
    "full-data-access": "The consumer keeps full access to its data",
    "tenant-isolation": "Consumer data is isolated from every other tenant",
    "privacy-policy-consistent": "Provider privacy policy matches the consumer's expectations",
    "data-destruction-on-termination": "Data is destroyed when the agreement ends",
    "security-audit": "Regular security tests and third-party audits",
    "anti-theft-mechanisms": "Anti-theft mechanisms are in place",
    "legal-security-commitments": "Legal commitments cover the security measures",
    "upgrade-testing-participation": "The consumer takes part in upgrade testing",
    "change-testing-environment": "Changes are tested in a staging environment first",
    "penalty-compensation-section": "The SLA includes penalty and compensation sections",
    "third-party-monitoring": "Compliance may be monitored by a third party",
}

_TERM_NAME = re.compile(r"^[a-z0-9]+(-[a-z0-9]+)*$")


def validate_terms(terms: Mapping[str, TermValue]) -> dict[str, TermValue]:
    """Check term names are kebab-case and values are booleans or strings."""
    for name, value in terms.items():
        if not _TERM_NAME.match(name):
            raise ValueError(f"Term name must be kebab-case: {name!r}")
        if not isinstance(value, (bool, str)):
            raise ValueError(f"Term {name} must be a boolean or string, got {value!r}")
    return dict(terms)


def unmet_terms(
    demanded: Mapping[str, TermValue], offered: Mapping[str, TermValue]
) -> list[str]:
    """Demanded terms the offer drops or changes, sorted by name."""
    return sorted(name for name, value in demanded.items() if offered.get(name) != value)
