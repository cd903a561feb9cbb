from django.db import migrations, models
import django.db.models.deletion
import django.utils.timezone
import model_utils.fields


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='SolverRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('created', model_utils.fields.AutoCreatedField(default=django.utils.timezone.now, editable=False, verbose_name='created')),
                ('modified', model_utils.fields.AutoLastModifiedField(default=django.utils.timezone.now, editable=False, verbose_name='modified')),
                ('status', models.SmallIntegerField(choices=[(0, 'new'), (1, 'queued'), (2, 'process'), (3, 'done'), (4, 'error')], default=0, verbose_name='Status')),
                ('error', models.TextField(blank=True, null=True, verbose_name='Error')),
                ('task_id', models.UUIDField(blank=True, null=True, verbose_name='Task ID')),
                ('game', models.CharField(help_text='e.g. goofspiel(num_cards=3)', max_length=255, verbose_name='Game')),
                ('algorithm', models.CharField(choices=[('cfr', 'cfr'), ('cfrplus', 'cfrplus'), ('ed', 'ed'), ('mccfr-external', 'mccfr-external'), ('mccfr-outcome', 'mccfr-outcome'), ('xfp', 'xfp')], default='cfr', max_length=32, verbose_name='Algorithm')),
                ('iterations', models.PositiveIntegerField(default=1000, verbose_name='Iterations')),
                ('report_every', models.PositiveIntegerField(default=100, verbose_name='Report every')),
                ('seed', models.IntegerField(default=0, verbose_name='Seed')),
                ('params', models.JSONField(blank=True, default=dict, verbose_name='params')),
                ('basename', models.UUIDField(blank=True, null=True, verbose_name='Basename')),
                ('nash_conv', models.FloatField(blank=True, null=True, verbose_name='NashConv')),
                ('policy', models.TextField(blank=True, null=True, verbose_name='Policy')),
            ],
            options={
                'verbose_name': 'Solver run',
                'verbose_name_plural': 'Solver runs',
            },
        ),
        migrations.CreateModel(
            name='TracePoint',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('iteration', models.PositiveIntegerField(verbose_name='Iteration')),
                ('metric', models.CharField(max_length=32, verbose_name='Metric')),
                ('value', models.FloatField(verbose_name='Value')),
                ('seconds', models.FloatField(verbose_name='Seconds')),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='trace', to='game_theory.solverrun', verbose_name='run')),
            ],
            options={
                'verbose_name': 'Trace point',
                'verbose_name_plural': 'Trace points',
                'ordering': ['iteration'],
                'unique_together': {('run', 'iteration', 'metric')},
            },
        ),
    ]
