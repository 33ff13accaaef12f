function initializeParams() {
    return {
        pulseRate: 1.2, // beats per second
        pulseAmount: 0.25, // fraction of the base scale added at the peak
    };
}

const dynamicScript = (function () {
    let elapsed = 0;
    let baseScale = null;
    return function (deltaTime, params, parentparams) {
        const { pulseRate, pulseAmount } = params;
        if (baseScale === null) baseScale = parentparams.heartScale;
        elapsed += deltaTime;
        parentparams.heartScale = baseScale * (1 + pulseAmount * Math.sin(2 * Math.PI * pulseRate * elapsed));
    };
})();
