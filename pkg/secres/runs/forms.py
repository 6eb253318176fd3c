from django import forms
from django.core.exceptions import ValidationError

from nbody.integrator import SCHEMES


class RunConfigForm(forms.Form):
    """Form for validating the merged options of one run"""
    ORDER_CHOICES = [
        (1, 'Order one in the masses'),
        (2, 'Order two in the masses'),
    ]

    system = forms.CharField(max_length=64, required=False)
    catalog = forms.CharField(required=False)
    order = forms.TypedChoiceField(choices=ORDER_CHOICES, coerce=int)
    kf = forms.IntegerField(min_value=0, required=False)
    ks = forms.IntegerField(min_value=0, required=False)
    birkhoff_order = forms.IntegerField(min_value=2)
    tend_yr = forms.FloatField(required=False)
    samples = forms.IntegerField(min_value=2)
    rho_scale = forms.FloatField()
    out = forms.CharField()
    jobs = forms.IntegerField(min_value=1)
    sec_degree = forms.IntegerField(min_value=2)
    trig_degree = forms.IntegerField(min_value=1)
    scheme = forms.ChoiceField(choices=[(name, name) for name in SCHEMES])
    ratio = forms.CharField(required=False)
    numeric = forms.BooleanField(required=False)

    def clean_tend_yr(self):
        tend_yr = self.cleaned_data.get('tend_yr')
        if tend_yr is not None and tend_yr <= 0:
            raise ValidationError('End time must be positive')
        return tend_yr

    def clean_rho_scale(self):
        rho_scale = self.cleaned_data['rho_scale']
        if rho_scale <= 0:
            raise ValidationError('Radius safety factor must be positive')
        return rho_scale

    def clean(self):
        """Validate truncation orders against the expansion"""
        cleaned_data = super().clean()
        sec_degree = cleaned_data.get('sec_degree')
        ks = cleaned_data.get('ks')
        kf = cleaned_data.get('kf')
        trig_degree = cleaned_data.get('trig_degree')

        if sec_degree is not None and sec_degree % 2:
            raise ValidationError('The secular degree of the expansion must be even')
        if ks is not None and sec_degree is not None and ks > sec_degree:
            raise ValidationError(f'K_S = {ks} exceeds the secular degree of the expansion ({sec_degree})')
        if kf is not None and trig_degree is not None and kf > trig_degree:
            raise ValidationError(f'K_F = {kf} exceeds the trigonometric degree of the expansion ({trig_degree})')

        return cleaned_data
