from django import forms
from django.core.exceptions import ValidationError

CATALOG_FIELDS = [
    'name', 'm0', 'units',
    'm1', 'a1', 'e1', 'M1', 'varpi1',
    'm2', 'a2', 'e2', 'M2', 'varpi2',
]


class SystemRecordForm(forms.Form):
    """Form for validating one catalog record (angles in degrees)"""
    UNIT_CHOICES = [
        ('mjup', 'Jupiter masses'),
        ('msun', 'Solar masses'),
    ]

    name = forms.CharField(max_length=64)
    m0 = forms.FloatField()
    units = forms.ChoiceField(choices=UNIT_CHOICES)

    m1 = forms.FloatField(min_value=0)
    a1 = forms.FloatField()
    e1 = forms.FloatField(min_value=0)
    M1 = forms.FloatField()
    varpi1 = forms.FloatField()

    m2 = forms.FloatField(min_value=0)
    a2 = forms.FloatField()
    e2 = forms.FloatField(min_value=0)
    M2 = forms.FloatField()
    varpi2 = forms.FloatField()

    def clean_m0(self):
        m0 = self.cleaned_data['m0']
        if m0 <= 0:
            raise ValidationError('Star mass must be positive')
        return m0

    def clean(self):
        """Validate orbit geometry"""
        cleaned_data = super().clean()
        for index in (1, 2):
            a = cleaned_data.get(f'a{index}')
            e = cleaned_data.get(f'e{index}')
            if a is not None and a <= 0:
                raise ValidationError(f'Semi-major axis of planet {index} must be positive')
            if e is not None and e >= 1:
                raise ValidationError(f'Eccentricity of planet {index} must be below 1')

        a1 = cleaned_data.get('a1')
        a2 = cleaned_data.get('a2')
        if a1 is not None and a2 is not None and a1 >= a2:
            # planet 1 is the inner one
            raise ValidationError('Planet 1 must be the inner planet (a1 < a2)')

        return cleaned_data


def form_errors_text(form):
    """Flatten form errors into one line."""
    parts = []
    for field, errors in form.errors.items():
        label = 'record' if field == '__all__' else field
        parts.append(f'{label}: {" ".join(str(e) for e in errors)}')
    return '; '.join(parts)
