package demo;

import java.io.InputStream;
import java.security.KeyStore;
import java.security.PrivateKey;
import java.security.cert.Certificate;
import java.security.cert.CertificateFactory;

public class Listing2 {
    public Certificate readCertificate(InputStream certificateStream) throws Exception {
        CertificateFactory factory = CertificateFactory.getInstance("X.509");
        return factory.generateCertificate(certificateStream);
    }

    public PrivateKey readKey(KeyStore.PrivateKeyEntry pkEntry) throws Exception {
        KeyStore k = KeyStore.getInstance("PKCS12");
        PrivateKey tmpPrv = pkEntry.getPrivateKey();
        return tmpPrv;
    }
}
